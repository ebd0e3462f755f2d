#include "extremo/glse.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace extremo {

WeightKind weight_kind_from_name(const std::string& name) {
  if (name == "identity") return WeightKind::IDENTITY;
  if (name == "exp_decay") return WeightKind::EXP_DECAY;
  if (name == "empirical") return WeightKind::EMPIRICAL;
  throw std::invalid_argument("unknown weight kind: " + name);
}

std::string weight_kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::IDENTITY: return "identity";
    case WeightKind::EXP_DECAY: return "exp_decay";
    case WeightKind::EMPIRICAL: return "empirical";
  }
  throw std::logic_error("unknown weight kind");
}

WeightMatrix weight_matrix(WeightKind kind, const std::vector<Lag>& lags,
                           const std::vector<ExtremogramEstimate>* estimates,
                           double floor) {
  WeightMatrix w;
  w.kind = kind;
  switch (kind) {
    case WeightKind::IDENTITY:
      w.diag.assign(lags.size(), 1.0);
      w.source = "identity";
      break;
    case WeightKind::EXP_DECAY:
      for (const Lag& h : lags) {
        const double n = lag_norm(h.full(), LagNorm::L2);
        w.diag.push_back(std::exp(-n * n));
      }
      w.source = "exp(-||lag||^2)";
      break;
    case WeightKind::EMPIRICAL: {
      if (!estimates || estimates->size() != lags.size())
        throw std::invalid_argument("weight_matrix: empirical kind needs estimates");
      for (std::size_t i = 0; i < lags.size(); ++i) {
        if (!((*estimates)[i].lag == lags[i]))
          throw std::invalid_argument("weight_matrix: lag lists misaligned");
        double v = (*estimates)[i].value;
        if (v < floor) v = floor;
        if (!(v > 0.0))
          throw std::runtime_error(
              "weight_matrix: empirical weights need strictly positive estimates");
        w.diag.push_back(v);
      }
      w.source = "empirical extremogram";
      break;
    }
  }
  return w;
}

std::string GLSEResult::to_json() const {
  nlohmann::json j;
  nlohmann::json theta = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) theta[names[i]] = theta_hat[i];
  j["theta_hat"] = theta;
  j["objective"] = objective;
  j["converged"] = converged;
  j["n_starts"] = n_starts;
  j["best_start_index"] = best_start_index;
  j["jacobian_rank_ok"] = jacobian_rank_ok;
  j["jacobian_condition"] = jacobian_condition;
  return j.dump(2);
}

namespace {

struct Objective {
  Family family;
  int dim;
  const std::vector<ExtremogramEstimate>* estimates;
  const WeightMatrix* weights;
  IntervalSet A, B;

  double operator()(const std::vector<double>& theta) const {
    DependenceModel m(family, dim, theta);
    double s = 0.0;
    for (std::size_t i = 0; i < estimates->size(); ++i) {
      const auto& e = (*estimates)[i];
      const double g = e.value - true_extremogram(m, e.lag.full(), A, B);
      s += weights->diag[i] * g * g;
    }
    return s;
  }
};

void clamp_to_box(std::vector<double>& x, const std::vector<ParamInterval>& box) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], box[i].lo, box[i].hi);
}

// Nelder-Mead with vertices projected into the box.
struct NmResult {
  std::vector<double> x;
  double f;
  std::size_t evals;
};

template <typename F>
NmResult nelder_mead(const F& fn, std::vector<double> x0,
                     const std::vector<ParamInterval>& box, double scale,
                     int max_iter) {
  const std::size_t k = x0.size();
  clamp_to_box(x0, box);
  std::vector<std::vector<double>> v(k + 1, x0);
  for (std::size_t i = 0; i < k; ++i) {
    double h = scale * (box[i].hi - box[i].lo);
    if (v[i + 1][i] + h > box[i].hi) h = -h;
    v[i + 1][i] += h;
    clamp_to_box(v[i + 1], box);
  }
  std::vector<double> f(k + 1);
  std::size_t evals = 0;
  for (std::size_t i = 0; i <= k; ++i) {
    f[i] = fn(v[i]);
    ++evals;
  }
  std::vector<std::size_t> ord(k + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    const std::size_t lo = ord[0], hi = ord[k], nh = ord[k - 1];
    if (std::abs(f[hi] - f[lo]) <= 1e-15 * (1.0 + std::abs(f[lo]))) break;

    std::vector<double> centroid(k, 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      if (i == hi) continue;
      for (std::size_t j = 0; j < k; ++j) centroid[j] += v[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(k);

    auto point = [&](double t) {
      std::vector<double> p(k);
      for (std::size_t j = 0; j < k; ++j)
        p[j] = centroid[j] + t * (centroid[j] - v[hi][j]);
      clamp_to_box(p, box);
      return p;
    };

    auto xr = point(1.0);
    double fr = fn(xr);
    ++evals;
    if (fr < f[ord[0]]) {
      auto xe = point(2.0);
      double fe = fn(xe);
      ++evals;
      if (fe < fr) {
        v[hi] = std::move(xe);
        f[hi] = fe;
      } else {
        v[hi] = std::move(xr);
        f[hi] = fr;
      }
    } else if (fr < f[nh]) {
      v[hi] = std::move(xr);
      f[hi] = fr;
    } else {
      auto xc = point(fr < f[hi] ? 0.5 : -0.5);
      double fc = fn(xc);
      ++evals;
      if (fc < std::min(fr, f[hi])) {
        v[hi] = std::move(xc);
        f[hi] = fc;
      } else {
        for (std::size_t i = 0; i <= k; ++i) {
          if (i == lo) continue;
          for (std::size_t j = 0; j < k; ++j)
            v[i][j] = v[lo][j] + 0.5 * (v[i][j] - v[lo][j]);
          f[i] = fn(v[i]);
          ++evals;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= k; ++i)
    if (f[i] < f[best]) best = i;
  return {v[best], f[best], evals};
}

double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  std::size_t i = index;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

}  // namespace

double glse_objective(const std::vector<double>& theta, Family family, int dim,
                      const std::vector<ExtremogramEstimate>& estimates,
                      const WeightMatrix& weights, const IntervalSet& A,
                      const IntervalSet& B) {
  if (weights.diag.size() != estimates.size())
    throw std::invalid_argument("glse_objective: weight/estimate misalignment");
  for (double wv : weights.diag)
    if (!(wv > 0.0))
      throw std::invalid_argument("glse_objective: weights must be positive");
  Objective obj{family, dim, &estimates, &weights, A, B};
  return obj(theta);
}

GLSEResult fit_glse(const std::vector<ExtremogramEstimate>& estimates,
                    const WeightMatrix& weights, Family family, int dim,
                    const std::vector<ParamInterval>& box, int starts, Rng& rng,
                    const std::optional<std::vector<double>>& warm_start,
                    const IntervalSet& A, const IntervalSet& B) {
  const int k = DependenceModel::param_count(family, dim);
  if (static_cast<int>(box.size()) != k)
    throw std::invalid_argument("fit_glse: box size mismatch");
  if (static_cast<int>(estimates.size()) < k)
    throw std::invalid_argument(
        "fit_glse: need at least as many lags as free parameters");
  if (weights.diag.size() != estimates.size())
    throw std::invalid_argument("fit_glse: weight/estimate misalignment");
  if (k > static_cast<int>(std::size(kHaltonBases)))
    throw std::invalid_argument("fit_glse: too many parameters");
  for (const auto& iv : box)
    if (!(iv.lo <= iv.hi)) throw std::invalid_argument("fit_glse: infeasible box");

  Objective obj{family, dim, &estimates, &weights, A, B};

  // scrambled low-discrepancy start points
  std::vector<double> shift(k);
  for (int j = 0; j < k; ++j) shift[j] = rng.uniform();
  std::vector<std::vector<double>> start_points;
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != k)
      throw std::invalid_argument("fit_glse: warm start size mismatch");
    start_points.push_back(*warm_start);
    clamp_to_box(start_points.back(), box);
  }
  for (int s = 0; s < starts; ++s) {
    std::vector<double> x(k);
    for (int j = 0; j < k; ++j) {
      double u = halton(static_cast<std::size_t>(s) + 1, kHaltonBases[j]) + shift[j];
      u -= std::floor(u);
      x[j] = box[j].lo + u * (box[j].hi - box[j].lo);
    }
    start_points.push_back(std::move(x));
  }

  GLSEResult res;
  res.names = DependenceModel::param_names(family, dim);
  res.n_starts = static_cast<int>(start_points.size());
  double best_f = std::numeric_limits<double>::infinity();
  double best_start_f = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < start_points.size(); ++s) {
    best_start_f = std::min(best_start_f, obj(start_points[s]));
    auto r = nelder_mead(obj, start_points[s], box, 0.15, 250 * k);
    // polish with progressively tighter simplices around the local minimum
    for (double scale : {1e-3, 1e-5}) {
      auto r2 = nelder_mead(obj, r.x, box, scale, 250 * k);
      if (r2.f < r.f) r = std::move(r2);
    }
    if (r.f < best_f) {
      best_f = r.f;
      res.theta_hat = r.x;
      res.best_start_index = static_cast<int>(s);
    }
  }
  res.objective = best_f;
  res.converged = best_f < best_start_f || best_f == 0.0;

  // Jacobian diagnostics at theta_hat; skip if the optimum sits on the
  // box boundary where central differences would leave the box
  try {
    std::vector<Lag> lags;
    for (const auto& e : estimates) lags.push_back(e.lag);
    auto jac = jacobian_P(res.theta_hat, family, dim, lags, A, B, box);
    res.jacobian_rank_ok = jac.full_rank;
    res.jacobian_condition = jac.condition;
  } catch (const std::exception&) {
    res.jacobian_rank_ok = false;
    res.jacobian_condition = std::numeric_limits<double>::infinity();
  }
  return res;
}

JacobianReport jacobian_P(const std::vector<double>& theta, Family family, int dim,
                          const std::vector<Lag>& lags, const IntervalSet& A,
                          const IntervalSet& B,
                          const std::vector<ParamInterval>& box, double step) {
  const std::size_t k = theta.size();
  const std::size_t p = lags.size();
  for (std::size_t j = 0; j < k; ++j) {
    if (theta[j] - step < box[j].lo || theta[j] + step > box[j].hi)
      throw std::runtime_error(
          "jacobian_P: theta must be interior to the box by at least the step");
  }
  JacobianReport rep;
  rep.matrix.assign(p, std::vector<double>(k, 0.0));
  Eigen::MatrixXd m(p, k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> tp = theta, tm = theta;
    tp[j] += step;
    tm[j] -= step;
    DependenceModel mp(family, dim, tp), mm(family, dim, tm);
    for (std::size_t i = 0; i < p; ++i) {
      const auto lag = lags[i].full();
      const double d = -(true_extremogram(mp, lag, A, B) -
                         true_extremogram(mm, lag, A, B)) /
                       (2.0 * step);
      rep.matrix[i][j] = d;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double tol = static_cast<double>(p) *
                     std::numeric_limits<double>::epsilon() * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  rep.rank = rank;
  rep.full_rank = rank == static_cast<int>(k);
  const double smin = sv(sv.size() - 1);
  rep.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return rep;
}

IdentifiabilityReport identifiability_scan(Family family, int dim,
                                           const std::vector<Lag>& lags,
                                           const IntervalSet& A, const IntervalSet& B,
                                           const std::vector<ParamInterval>& box,
                                           int samples, Rng& rng) {
  if (samples < 2)
    throw std::invalid_argument("identifiability_scan: need at least 2 samples");
  const int k = DependenceModel::param_count(family, dim);
  auto draw = [&]() {
    std::vector<double> x(k);
    for (int j = 0; j < k; ++j) x[j] = rng.uniform(box[j].lo, box[j].hi);
    return x;
  };
  auto rho_vec = [&](const std::vector<double>& theta) {
    DependenceModel m(family, dim, theta);
    std::vector<double> out;
    for (const auto& h : lags) out.push_back(true_extremogram(m, h.full(), A, B));
    return out;
  };
  IdentifiabilityReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    auto t1 = draw(), t2 = draw();
    double sep = 0.0;
    for (int j = 0; j < k; ++j) sep += (t1[j] - t2[j]) * (t1[j] - t2[j]);
    if (std::sqrt(sep) < 1e-3) continue;
    auto r1 = rho_vec(t1), r2 = rho_vec(t2);
    double gap = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i)
      gap += (r1[i] - r2[i]) * (r1[i] - r2[i]);
    if (gap < rep.min_gap) {
      rep.min_gap = gap;
      rep.theta1 = t1;
      rep.theta2 = t2;
    }
  }
  rep.flagged = rep.min_gap <= 1e-14;
  return rep;
}

}  // namespace extremo
