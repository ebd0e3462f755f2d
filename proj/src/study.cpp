#include "extremo/study.hpp"

#include "extremo/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace extremo {

void ScenarioConfig::validate() const {
  DependenceModel model(family, dim, theta_star);  // throws if infeasible
  if (static_cast<int>(fixed_sites.empty() ? 0 : fixed_sites[0].size()) + w != dim)
    throw std::invalid_argument("scenario: fixed-site dimension + w must equal dim");
  if (n <= 0) throw std::invalid_argument("scenario: n must be positive");
  if (!(quantile_level > 0.0 && quantile_level < 1.0))
    throw std::invalid_argument("scenario: quantile level must be in (0,1)");
  if (lags.empty()) throw std::invalid_argument("scenario: empty lag set");
  if (n_replicates < 1) throw std::invalid_argument("scenario: need >= 1 replicate");
  const auto& box = model.box();
  for (std::size_t i = 0; i < theta_star.size(); ++i)
    if (theta_star[i] < box[i].lo || theta_star[i] > box[i].hi)
      throw std::invalid_argument("scenario: theta_star outside the box");
}

MetricsTable metrics(const std::vector<std::vector<double>>& estimates,
                     const std::vector<double>& theta_star,
                     const std::vector<std::string>& names) {
  if (estimates.empty()) throw std::invalid_argument("metrics: no replicates");
  const std::size_t k = theta_star.size();
  MetricsTable t;
  t.names = names;
  t.true_value = theta_star;
  t.mean.assign(k, 0.0);
  t.mae.assign(k, 0.0);
  t.rmse.assign(k, 0.0);
  t.rel.assign(k, 0.0);
  const double r = static_cast<double>(estimates.size());
  for (const auto& row : estimates) {
    if (row.size() != k) throw std::invalid_argument("metrics: ragged estimates");
    for (std::size_t j = 0; j < k; ++j) {
      const double e = row[j] - theta_star[j];
      t.mean[j] += row[j] / r;
      t.mae[j] += std::abs(e) / r;
      t.rmse[j] += e * e / r;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    t.rmse[j] = std::sqrt(t.rmse[j]);
    if (theta_star[j] == 0.0)
      throw std::invalid_argument("metrics: REL undefined for zero true value");
    t.rel[j] = t.rmse[j] / std::abs(theta_star[j]);
  }
  return t;
}

std::string MetricsTable::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < names.size(); ++i) {
    j[names[i]] = {{"true", true_value[i]}, {"mean", mean[i]},
                   {"mae", mae[i]},          {"rmse", rmse[i]},
                   {"rel", rel[i]}};
  }
  return j.dump(2);
}

void MetricsTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "parameter,true,mean,mae,rmse,rel\n";
  char buf[200];
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  names[i].c_str(), true_value[i], mean[i], mae[i], rmse[i],
                  rel[i]);
    out << buf;
  }
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::vector<double> theta;
};

RepOutcome estimate_one(const SpaceTimeField& field, const ScenarioConfig& cfg,
                        const std::vector<Lag>& lags, Rng fit_rng) {
  RepOutcome out;
  try {
    DependenceModel model(cfg.family, cfg.dim, cfg.theta_star);
    ThresholdSpec thr = select_threshold(field, cfg.quantile_level);
    auto est = empirical_extremogram(field, lags, thr, cfg.set_a, cfg.set_b);
    est = bias_correct(est, cfg.bias_regime);
    auto wm = weight_matrix(cfg.weights, lags,
                            cfg.weights == WeightKind::EMPIRICAL ? &est : nullptr,
                            1e-3);
    auto fit = fit_glse(est, wm, cfg.family, cfg.dim, model.box(), cfg.starts,
                        fit_rng, cfg.theta_star, cfg.set_a, cfg.set_b);
    if (!fit.converged) return out;
    out.ok = true;
    out.theta = fit.theta_hat;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  DependenceModel model(config.family, config.dim, config.theta_star);
  ObservationDomain domain(config.fixed_sites, config.n, config.w);
  auto sampler = make_sampler(model, domain, config.sim);

  Rng master(config.seed);
  std::vector<RepOutcome> outcomes(config.n_replicates);
  // Simulation draws are serialized through the shared sampler; each
  // replicate still uses its own derived stream, so the outputs do not
  // depend on the thread count.
  for (int r = 0; r < config.n_replicates; ++r) {
    Rng sim_rng = master.split(2 * static_cast<std::uint64_t>(r));
    SpaceTimeField field =
        simulate_brown_resnick(*sampler, domain, sim_rng, config.sim.max_arrivals);
    Rng fit_rng = master.split(2 * static_cast<std::uint64_t>(r) + 1);
    outcomes[r] = estimate_one(field, config, config.lags, fit_rng);
  }

  ScenarioResult res;
  for (int r = 0; r < config.n_replicates; ++r) {
    if (outcomes[r].ok) {
      res.estimates.push_back(outcomes[r].theta);
      res.replicate_index.push_back(r);
    } else {
      ++res.n_failed;
    }
  }
  if (res.n_failed > 0)
    std::cerr << "warning: " << res.n_failed << " of " << config.n_replicates
              << " replicates failed\n";
  if (static_cast<double>(res.n_failed) > 0.2 * config.n_replicates)
    throw PartialFailure("run_scenario: more than 20% of replicates failed");
  res.table = metrics(res.estimates, config.theta_star,
                      DependenceModel::param_names(config.family, config.dim));
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<LagSensitivityRow> lag_sensitivity(
    const ScenarioConfig& base,
    const std::vector<std::pair<std::string, std::vector<Lag>>>& lag_sets) {
  if (lag_sets.size() < 2)
    throw std::invalid_argument("lag_sensitivity: need at least 2 lag sets");
  ScenarioConfig cfg = base;
  cfg.lags = lag_sets.front().second;
  cfg.validate();
  DependenceModel model(cfg.family, cfg.dim, cfg.theta_star);
  ObservationDomain domain(cfg.fixed_sites, cfg.n, cfg.w);
  auto sampler = make_sampler(model, domain, cfg.sim);
  const int k = DependenceModel::param_count(cfg.family, cfg.dim);

  // one shared batch of fields across all lag sets
  Rng master(cfg.seed);
  std::vector<SpaceTimeField> fields;
  fields.reserve(cfg.n_replicates);
  for (int r = 0; r < cfg.n_replicates; ++r) {
    Rng sim_rng = master.split(2 * static_cast<std::uint64_t>(r));
    fields.push_back(
        simulate_brown_resnick(*sampler, domain, sim_rng, cfg.sim.max_arrivals));
  }

  std::vector<LagSensitivityRow> rows;
  for (const auto& [label, lags] : lag_sets) {
    LagSensitivityRow row;
    row.label = label;
    if (static_cast<int>(lags.size()) < k) {
      std::cerr << "warning: lag set " << label
                << " has fewer lags than parameters; skipped\n";
      row.skipped = true;
      rows.push_back(std::move(row));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::vector<double>> est;
    int failed = 0;
    for (int r = 0; r < cfg.n_replicates; ++r) {
      ScenarioConfig c = cfg;
      c.lags = lags;
      auto out = estimate_one(fields[r], c, lags,
                              master.split(2 * static_cast<std::uint64_t>(r) + 1));
      if (out.ok)
        est.push_back(out.theta);
      else
        ++failed;
    }
    if (static_cast<double>(failed) > 0.2 * cfg.n_replicates)
      throw PartialFailure("lag_sensitivity: more than 20% failures for set " +
                           label);
    row.table = metrics(est, cfg.theta_star,
                        DependenceModel::param_names(cfg.family, cfg.dim));
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RateCheckRow> rate_check(
    const std::map<std::int64_t, MetricsTable>& rmse_by_T, int w, int d,
    double beta1_lo, double beta1_hi, double tolerance) {
  if (rmse_by_T.size() < 2)
    throw std::invalid_argument("rate_check: need at least 2 sample sizes");
  const auto& base = rmse_by_T.begin()->second;
  const double T0 = static_cast<double>(rmse_by_T.begin()->first);
  std::vector<RateCheckRow> rows;
  for (auto it = std::next(rmse_by_T.begin()); it != rmse_by_T.end(); ++it) {
    const double k = static_cast<double>(it->first) / T0;
    for (std::size_t j = 0; j < base.names.size(); ++j) {
      if (!(base.rmse[j] > 0.0))
        throw std::runtime_error("rate_check: zero base RMSE for " + base.names[j]);
      RateCheckRow row;
      row.parameter = base.names[j];
      row.k = k;
      row.factor = it->second.rmse[j] / base.rmse[j];
      row.band_lo = std::pow(1.0 / k, (w - beta1_lo * d) / 2.0);
      row.band_hi = std::pow(1.0 / k, (w - beta1_hi * d) / 2.0);
      if (row.band_lo > row.band_hi) std::swap(row.band_lo, row.band_hi);
      row.in_band = row.factor >= row.band_lo - tolerance &&
                    row.factor <= row.band_hi + tolerance;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void save_estimates_long(const ScenarioResult& result,
                         const std::vector<std::string>& names,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "replicate,parameter,estimate\n";
  char buf[160];
  for (std::size_t r = 0; r < result.estimates.size(); ++r) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%d,%s,%.17g\n", result.replicate_index[r],
                    names[j].c_str(), result.estimates[r][j]);
      out << buf;
    }
  }
}

}  // namespace extremo
