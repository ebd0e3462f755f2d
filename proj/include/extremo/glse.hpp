#pragma once

#include <optional>
#include <string>
#include <vector>

#include "extremo/extremogram.hpp"
#include "extremo/models.hpp"
#include "extremo/rng.hpp"

namespace extremo {

enum class WeightKind { IDENTITY, EXP_DECAY, EMPIRICAL };

WeightKind weight_kind_from_name(const std::string& name);
std::string weight_kind_name(WeightKind k);

/// Diagonal weight matrix over a lag list. EXP_DECAY uses exp(-||(h,u)||^2),
/// EMPIRICAL the (possibly bias corrected) extremogram estimates.
struct WeightMatrix {
  WeightKind kind = WeightKind::IDENTITY;
  std::vector<double> diag;
  std::string source;
};

/// EMPIRICAL weights must be strictly positive; a zero estimate is an error
/// unless `floor` > 0, in which case entries below the floor are clamped to
/// it (small-sample fallback so a single empty count cannot void the fit).
WeightMatrix weight_matrix(WeightKind kind, const std::vector<Lag>& lags,
                           const std::vector<ExtremogramEstimate>* estimates = nullptr,
                           double floor = 0.0);

struct GLSEResult {
  std::vector<std::string> names;
  std::vector<double> theta_hat;
  double objective = 0.0;
  bool converged = false;
  int n_starts = 0;
  int best_start_index = -1;
  bool jacobian_rank_ok = false;
  double jacobian_condition = 0.0;
  std::string to_json() const;
};

/// g^T V g with g_i = rho^_i - rho_theta(h_i).
double glse_objective(const std::vector<double>& theta, Family family, int dim,
                      const std::vector<ExtremogramEstimate>& estimates,
                      const WeightMatrix& weights, const IntervalSet& A,
                      const IntervalSet& B);

/// Multi-start Nelder-Mead over the box (scrambled Halton starts plus an
/// optional warm start); ties broken by lowest start index.
GLSEResult fit_glse(const std::vector<ExtremogramEstimate>& estimates,
                    const WeightMatrix& weights, Family family, int dim,
                    const std::vector<ParamInterval>& box, int starts, Rng& rng,
                    const std::optional<std::vector<double>>& warm_start = {},
                    const IntervalSet& A = IntervalSet{1.0},
                    const IntervalSet& B = IntervalSet{1.0});

struct JacobianReport {
  std::vector<std::vector<double>> matrix;  // p x k, entries -d rho / d theta
  int rank = 0;
  bool full_rank = false;
  double condition = 0.0;
};

/// Central finite differences of -rho_theta(h) in each parameter; numerical
/// rank via SVD with tolerance p * eps * sigma_max.
JacobianReport jacobian_P(const std::vector<double>& theta, Family family, int dim,
                          const std::vector<Lag>& lags, const IntervalSet& A,
                          const IntervalSet& B,
                          const std::vector<ParamInterval>& box,
                          double step = 1e-6);

struct IdentifiabilityReport {
  double min_gap = 0.0;  // min over sampled pairs of sum_i (rho1_i - rho2_i)^2
  std::vector<double> theta1;
  std::vector<double> theta2;
  bool flagged = false;  // gap <= 1e-14 with parameter separation >= 1e-3
};

IdentifiabilityReport identifiability_scan(Family family, int dim,
                                           const std::vector<Lag>& lags,
                                           const IntervalSet& A, const IntervalSet& B,
                                           const std::vector<ParamInterval>& box,
                                           int samples, Rng& rng);

}  // namespace extremo
