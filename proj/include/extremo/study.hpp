#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "extremo/extremogram.hpp"
#include "extremo/glse.hpp"
#include "extremo/simulator.hpp"

namespace extremo {

struct ScenarioConfig {
  Family family = Family::ISO_FRAC;
  int dim = 3;
  std::vector<double> theta_star;
  std::vector<Coord> fixed_sites;     // spatial block F
  std::int64_t n = 0;                 // increasing (time) extent
  int w = 1;
  double quantile_level = 0.96;
  std::vector<Lag> lags;
  WeightKind weights = WeightKind::EMPIRICAL;
  IntervalSet set_a{1.0};
  IntervalSet set_b{1.0};
  int n_replicates = 20;
  std::uint64_t seed = 1;
  BiasRegime bias_regime = BiasRegime::NONE;
  int starts = 8;
  int threads = 1;
  SimOptions sim;

  void validate() const;
};

struct MetricsTable {
  std::vector<std::string> names;
  std::vector<double> true_value;
  std::vector<double> mean;
  std::vector<double> mae;
  std::vector<double> rmse;
  std::vector<double> rel;

  std::string to_json() const;
  void save_csv(const std::string& path) const;
};

/// Columnwise MEAN, MAE, RMSE and REL = sqrt(mean((theta^-theta*)^2/theta*^2)).
MetricsTable metrics(const std::vector<std::vector<double>>& estimates,
                     const std::vector<double>& theta_star,
                     const std::vector<std::string>& names);

struct ScenarioResult {
  MetricsTable table;
  std::vector<std::vector<double>> estimates;  // per converged replicate
  std::vector<int> replicate_index;            // source replicate of each row
  int n_failed = 0;
  double wall_seconds = 0.0;
};

/// Per replicate: simulate -> threshold -> extremogram (+ bias correction)
/// -> fit, with a per-replicate derived seed; deterministic for any thread
/// count.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Optional per-replicate hook variant; fields are simulated once and handed
/// to the callback before estimation (used to share fields across lag sets).
struct LagSensitivityRow {
  std::string label;
  MetricsTable table;
  double wall_seconds = 0.0;
  bool skipped = false;
};

std::vector<LagSensitivityRow> lag_sensitivity(
    const ScenarioConfig& base,
    const std::vector<std::pair<std::string, std::vector<Lag>>>& lag_sets);

struct RateCheckRow {
  std::string parameter;
  double k = 0.0;            // T / T0
  double factor = 0.0;       // RMSE(kT0) / RMSE(T0)
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool in_band = false;      // inside band widened by the tolerance
};

/// Empirical RMSE ratios vs the theoretical band
/// [(1/k)^{(w - beta1_hi d)/2}, (1/k)^{(w - beta1_lo d)/2}].
std::vector<RateCheckRow> rate_check(
    const std::map<std::int64_t, MetricsTable>& rmse_by_T, int w, int d,
    double beta1_lo, double beta1_hi, double tolerance = 0.0);

/// Long-format per-replicate CSV: replicate,parameter,estimate.
void save_estimates_long(const ScenarioResult& result,
                         const std::vector<std::string>& names,
                         const std::string& path);

}  // namespace extremo
