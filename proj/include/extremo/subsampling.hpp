#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "extremo/extremogram.hpp"
#include "extremo/glse.hpp"
#include "extremo/rng.hpp"

namespace extremo {

/// Sliding-block configuration. tau_m = m^{(w - beta1 d)/2} is the rate used
/// to norm the block deviations.
struct SubsampleConfig {
  std::int64_t block_length = 0;  // 0 = floor(n^0.7)
  std::int64_t stride = 0;        // 0 = max(1, floor(b/3))
  double level = 0.95;
  double beta1 = 0.0;             // 0 = 5w/(24d)
  bool reuse_threshold = false;   // reuse the full-sample threshold per block
  // Symmetric two-sided intervals from the |deviation| quantile instead of
  // equal-tailed ones; more robust when the deviation law is skewed.
  bool symmetric = false;
  BiasRegime bias_regime = BiasRegime::NONE;
  int starts = 8;

  /// Fill zero fields with the defaults for a domain of size n, lag
  /// dimension d = q + w.
  SubsampleConfig resolved(std::int64_t n, int w, int d) const;
};

struct SubsampleCI {
  std::vector<std::string> names;
  std::vector<double> point_estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  int n_blocks = 0;
  int n_dropped = 0;
  SubsampleConfig config;

  std::string to_json() const;
  void save_csv(const std::string& path) const;
};

double subsample_rate(double m, int w, int d, double beta1);

/// Equal-tailed CI from the empirical distribution of
/// tau_b (theta^_b - theta^_n) over sliding blocks along the increasing
/// dimensions; the fixed block is kept whole. Threshold, extremogram and fit
/// are recomputed per block.
SubsampleCI subsample_ci(const SpaceTimeField& field, const std::vector<Lag>& lags,
                         double threshold_level, const IntervalSet& A,
                         const IntervalSet& B, WeightKind weights_kind,
                         Family family, int dim,
                         const std::vector<ParamInterval>& box,
                         const SubsampleConfig& config, Rng& rng,
                         int threads = 1);

}  // namespace extremo
