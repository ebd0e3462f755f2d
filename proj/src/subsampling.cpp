#include "extremo/subsampling.hpp"

#include "extremo/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace extremo {

SubsampleConfig SubsampleConfig::resolved(std::int64_t n, int w, int d) const {
  SubsampleConfig c = *this;
  if (c.block_length == 0)
    c.block_length = static_cast<std::int64_t>(
        std::floor(std::pow(static_cast<double>(n), 0.7)));
  if (c.stride == 0) c.stride = std::max<std::int64_t>(1, c.block_length / 3);
  if (c.beta1 == 0.0) c.beta1 = 5.0 * w / (24.0 * d);
  return c;
}

double subsample_rate(double m, int w, int d, double beta1) {
  return std::pow(m, (static_cast<double>(w) - beta1 * d) / 2.0);
}

std::string SubsampleCI::to_json() const {
  nlohmann::json j;
  for (std::size_t i = 0; i < names.size(); ++i) {
    j["parameters"][names[i]] = {{"estimate", point_estimate[i]},
                                 {"lower", lower[i]},
                                 {"upper", upper[i]}};
  }
  j["n_blocks"] = n_blocks;
  j["n_dropped"] = n_dropped;
  j["level"] = config.level;
  j["block_length"] = config.block_length;
  j["stride"] = config.stride;
  j["beta1"] = config.beta1;
  j["symmetric"] = config.symmetric;
  return j.dump(2);
}

void SubsampleCI::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "parameter,estimate,lower,upper\n";
  char buf[160];
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", names[i].c_str(),
                  point_estimate[i], lower[i], upper[i]);
    out << buf;
  }
}

namespace {

struct FitOutcome {
  bool ok = false;
  std::vector<double> theta;
};

FitOutcome fit_block(const SpaceTimeField& field, const std::vector<Lag>& lags,
                     double threshold_level, const IntervalSet& A,
                     const IntervalSet& B, WeightKind weights_kind, Family family,
                     int dim, const std::vector<ParamInterval>& box,
                     const SubsampleConfig& cfg, Rng rng,
                     const ThresholdSpec* fixed_threshold) {
  FitOutcome out;
  try {
    ThresholdSpec thr = fixed_threshold && cfg.reuse_threshold
                            ? *fixed_threshold
                            : select_threshold(field, threshold_level);
    auto est = empirical_extremogram(field, lags, thr, A, B);
    est = bias_correct(est, cfg.bias_regime);
    auto w = weight_matrix(weights_kind, lags,
                           weights_kind == WeightKind::EMPIRICAL ? &est : nullptr,
                           1e-3);
    auto fit = fit_glse(est, w, family, dim, box, cfg.starts, rng, {}, A, B);
    if (!fit.converged) return out;
    out.ok = true;
    out.theta = fit.theta_hat;
  } catch (const std::exception&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

SubsampleCI subsample_ci(const SpaceTimeField& field, const std::vector<Lag>& lags,
                         double threshold_level, const IntervalSet& A,
                         const IntervalSet& B, WeightKind weights_kind,
                         Family family, int dim,
                         const std::vector<ParamInterval>& box,
                         const SubsampleConfig& config, Rng& rng, int threads) {
  const ObservationDomain& dom = *field.domain;
  const int w = dom.w();
  const std::int64_t n = dom.n();
  SubsampleConfig cfg = config.resolved(n, w, dim);
  const std::int64_t b = cfg.block_length;
  if (b <= 0 || b > n)
    throw std::invalid_argument("subsample_ci: block length must be in [1, n]");
  if (cfg.stride <= 0) throw std::invalid_argument("subsample_ci: stride must be positive");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw std::invalid_argument("subsample_ci: level must be in (0,1)");
  {
    const double wd = static_cast<double>(w) / dim;
    if (!(cfg.beta1 > wd / 5.0 && cfg.beta1 < wd / 2.0))
      throw std::invalid_argument("subsample_ci: beta1 must lie in (w/(5d), w/(2d))");
  }

  // per-dimension window offsets (0-based)
  std::vector<std::int64_t> offsets;
  for (std::int64_t o = 0; o + b <= n; o += cfg.stride) offsets.push_back(o);
  std::size_t n_blocks = 1;
  for (int j = 0; j < w; ++j) n_blocks *= offsets.size();
  if (n_blocks < 10 && b < n)
    throw std::invalid_argument(
        "subsample_ci: fewer than 10 blocks; shrink the stride or block length");

  // full-sample fit
  ThresholdSpec full_thr = select_threshold(field, threshold_level);
  Rng full_rng = rng.split(0);
  auto full = fit_block(field, lags, threshold_level, A, B, weights_kind, family,
                        dim, box, cfg, full_rng, nullptr);
  if (!full.ok) throw std::runtime_error("subsample_ci: full-sample fit failed");

  SubsampleCI ci;
  ci.names = DependenceModel::param_names(family, dim);
  ci.point_estimate = full.theta;
  ci.config = cfg;

  if (b == n) {
    ci.lower = full.theta;
    ci.upper = full.theta;
    ci.n_blocks = 1;
    return ci;
  }

  ObservationDomain sub_dom(dom.fixed_sites(), b, w);
  const std::size_t grid_full = static_cast<std::size_t>(std::pow(
      static_cast<double>(n), w));
  (void)grid_full;

  // enumerate block corner offsets in row-major order over the w dims
  std::vector<std::vector<std::int64_t>> corners;
  {
    std::vector<std::size_t> idx(w, 0);
    for (;;) {
      std::vector<std::int64_t> c(w);
      for (int j = 0; j < w; ++j) c[j] = offsets[idx[j]];
      corners.push_back(std::move(c));
      int j = w - 1;
      while (j >= 0 && ++idx[j] == offsets.size()) idx[j--] = 0;
      if (j < 0) break;
    }
  }

  auto extract = [&](const std::vector<std::int64_t>& corner) {
    SpaceTimeField sub;
    sub.domain = &sub_dom;
    sub.values.resize(sub_dom.size());
    for (std::size_t i = 0; i < sub_dom.size(); ++i) {
      Coord site = sub_dom.site(i);
      for (int j = 0; j < w; ++j) site[dom.q() + j] += corner[j];
      const std::size_t gi = dom.index_of(site);
      sub.values[i] = field.values[gi];
    }
    return sub;
  };

  std::vector<FitOutcome> block_fits(corners.size());
  const int nthreads = std::max(1, threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= corners.size()) break;
      SpaceTimeField sub = extract(corners[k]);
      block_fits[k] = fit_block(sub, lags, threshold_level, A, B, weights_kind,
                                family, dim, box, cfg, rng.split(k + 1),
                                &full_thr);
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const double tau_b = subsample_rate(static_cast<double>(b), w, dim, cfg.beta1);
  const double tau_n = subsample_rate(static_cast<double>(n), w, dim, cfg.beta1);
  const std::size_t k = full.theta.size();
  std::vector<std::vector<double>> dev(k);
  int dropped = 0;
  for (const auto& bf : block_fits) {
    if (!bf.ok) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j)
      dev[j].push_back(tau_b * (bf.theta[j] - full.theta[j]));
  }
  const std::size_t used = block_fits.size() - static_cast<std::size_t>(dropped);
  if (dropped > 0)
    std::cerr << "warning: dropped " << dropped << " of " << block_fits.size()
              << " subsample blocks (non-convergent fits)\n";
  if (static_cast<double>(dropped) > 0.2 * static_cast<double>(block_fits.size()))
    throw PartialFailure("subsample_ci: more than 20% of blocks dropped");
  if (used == 0) throw std::runtime_error("subsample_ci: no usable blocks");

  const double alpha = 1.0 - cfg.level;
  auto quantile = [](std::vector<double>& v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  ci.lower.resize(k);
  ci.upper.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (cfg.symmetric) {
      for (double& v : dev[j]) v = std::abs(v);
      const double q = quantile(dev[j], cfg.level);
      ci.lower[j] = full.theta[j] - q / tau_n;
      ci.upper[j] = full.theta[j] + q / tau_n;
    } else {
      const double q_hi = quantile(dev[j], 1.0 - alpha / 2.0);
      const double q_lo = quantile(dev[j], alpha / 2.0);
      ci.lower[j] = full.theta[j] - q_hi / tau_n;
      ci.upper[j] = full.theta[j] - q_lo / tau_n;
      if (ci.lower[j] > ci.upper[j]) std::swap(ci.lower[j], ci.upper[j]);
    }
  }
  ci.n_blocks = static_cast<int>(used);
  ci.n_dropped = dropped;
  return ci;
}

}  // namespace extremo
