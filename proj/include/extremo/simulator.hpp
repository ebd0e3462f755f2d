#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

#include "extremo/domain.hpp"
#include "extremo/models.hpp"
#include "extremo/rng.hpp"

namespace extremo {

/// Lower-triangular factor of Gamma(s,t) = delta(s-s0) + delta(t-s0)
/// - delta(s-t), the covariance of the increment process W(.) - W(s0).
/// A jitter ladder (0, 1e-10 tr/N, 1e-8 tr/N) absorbs the degenerate
/// reference row.
struct GaussianFactor {
  Eigen::MatrixXd chol;  // lower triangular
  double jitter = 0.0;
};

using DeltaFn = std::function<double(std::span<const double>)>;

/// Factor over arbitrary real points; `delta` is evaluated on point
/// differences. Deterministic given inputs.
GaussianFactor build_factor_points(const std::vector<std::vector<double>>& points,
                                   const DeltaFn& delta,
                                   std::size_t max_sites = 20000);

GaussianFactor build_factor(const DependenceModel& model,
                            const ObservationDomain& domain,
                            std::size_t max_sites = 20000);

/// One draw of G(s) = W(s) - W(s_pin); G(pin) = 0 exactly and
/// Cov[G(s), G(t)] = delta(s-pin) + delta(t-pin) - delta(s-t).
Eigen::VectorXd sample_pinned(const GaussianFactor& factor, std::size_t pin_index,
                              Rng& rng);

/// Gaussian sampler over the sites of a domain, pinned implicitly at an
/// arbitrary base point (only increments matter downstream).
class PinnedGaussianSampler {
 public:
  virtual ~PinnedGaussianSampler() = default;
  virtual std::size_t size() const = 0;
  /// One draw of W over all sites.
  virtual void sample_increments(Rng& rng, std::vector<double>& w) = 0;
  /// out[i] = delta(s_i - s_k) for all sites i.
  virtual void delta_to(std::size_t k, std::vector<double>& out) const = 0;
};

enum class SamplerKind { AUTO, DENSE, SEPARABLE };

struct SimOptions {
  SamplerKind sampler = SamplerKind::AUTO;
  std::size_t max_sites = 20000;      // dense factorisation cap
  std::size_t max_arrivals = 1000000; // per-site Poisson arrival guard
};

std::unique_ptr<PinnedGaussianSampler> make_sampler(const DependenceModel& model,
                                                    const ObservationDomain& domain,
                                                    const SimOptions& opts = {});

/// Exact Brown-Resnick draw on the domain via the extremal-functions sweep;
/// margins are standard unit Frechet.
SpaceTimeField simulate_brown_resnick(const DependenceModel& model,
                                      const ObservationDomain& domain, Rng& rng,
                                      const SimOptions& opts = {});

/// Same field law, reusing a prebuilt sampler (shared across replicates).
SpaceTimeField simulate_brown_resnick(PinnedGaussianSampler& sampler,
                                      const ObservationDomain& domain, Rng& rng,
                                      std::size_t max_arrivals = 1000000);

}  // namespace extremo
