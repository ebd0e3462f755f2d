#pragma once

#include <string>
#include <vector>

#include "extremo/domain.hpp"
#include "extremo/models.hpp"

namespace extremo {

/// Empirical quantile threshold a_m. Convention: order statistic at index
/// ceil(level * N) (1-based), so counts are reproducible bit-exactly.
struct ThresholdSpec {
  double quantile_level = 0.0;
  double realized = 0.0;
  bool degenerate = false;  // all field values equal
};

ThresholdSpec select_threshold(const SpaceTimeField& field, double level);

struct ExtremogramEstimate {
  Lag lag;
  double value = 0.0;
  std::size_t numerator_count = 0;
  std::size_t numerator_sites = 0;    // |D_n(h)|
  std::size_t denominator_count = 0;
  std::size_t denominator_sites = 0;  // |D_n|
  bool bias_corrected = false;
  ThresholdSpec threshold;
  IntervalSet set_a;
  IntervalSet set_b;
};

/// Ratio-of-counts estimator over D_n = F x I_n; membership in the open
/// sets is strict, threshold ties are excluded.
std::vector<ExtremogramEstimate> empirical_extremogram(
    const SpaceTimeField& field, const std::vector<Lag>& lags,
    const ThresholdSpec& threshold, const IntervalSet& A, const IntervalSet& B);

enum class BiasRegime { NONE, FIRST_ORDER };

/// First-order Frechet bias correction for ray sets:
/// rho~ = rho^ - (1/(2 a A_)) (rho^ - 2 A_/B_) (rho^ - 1).
std::vector<ExtremogramEstimate> bias_correct(
    const std::vector<ExtremogramEstimate>& estimates, BiasRegime regime);

enum class RegimeAdvice { NONE, FIRST_ORDER, UNSUPPORTED };

/// Rate-regime switch on beta1: correction needed on (w/(5d), w/(3d)],
/// plain estimator valid on (w/(3d), w/(2d)).
RegimeAdvice regime_advise(std::int64_t n, int w, int d, double beta1);

/// CSV with header hf1,..,hfq,hi1,..,hiw,value,num_count,num_sites,
/// den_count,den_sites,corrected.
void save_estimates(const std::vector<ExtremogramEstimate>& estimates, int q, int w,
                    const std::string& path);
std::vector<ExtremogramEstimate> load_estimates(const std::string& path, int q,
                                                int w);

}  // namespace extremo
