#include "extremo/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace extremo {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::ISO_FRAC: return "ISO_FRAC";
    case Family::ISO_FRAC_GEO_ANISO: return "ISO_FRAC_GEO_ANISO";
    case Family::AXIS_ANISO: return "AXIS_ANISO";
    case Family::AXIS_ANISO_ROT: return "AXIS_ANISO_ROT";
    case Family::TIME_SHIFTED: return "TIME_SHIFTED";
  }
  throw std::logic_error("unknown family");
}

Family family_from_name(const std::string& name) {
  if (name == "ISO_FRAC") return Family::ISO_FRAC;
  if (name == "ISO_FRAC_GEO_ANISO") return Family::ISO_FRAC_GEO_ANISO;
  if (name == "AXIS_ANISO") return Family::AXIS_ANISO;
  if (name == "AXIS_ANISO_ROT") return Family::AXIS_ANISO_ROT;
  if (name == "TIME_SHIFTED") return Family::TIME_SHIFTED;
  throw std::invalid_argument("unknown model family: " + name);
}

int DependenceModel::param_count(Family family, int dim) {
  switch (family) {
    case Family::ISO_FRAC: return 4;
    case Family::ISO_FRAC_GEO_ANISO: return 6;
    case Family::AXIS_ANISO: return 2 * dim;
    case Family::AXIS_ANISO_ROT: return 2 * dim + 1;
    case Family::TIME_SHIFTED: return 3 * dim - 1;
  }
  throw std::logic_error("unknown family");
}

std::vector<std::string> DependenceModel::param_names(Family family, int dim) {
  std::vector<std::string> out;
  auto cs = [&](int k) {
    for (int j = 1; j <= k; ++j) out.push_back("C" + std::to_string(j));
  };
  auto as = [&](int k) {
    for (int j = 1; j <= k; ++j) out.push_back("alpha" + std::to_string(j));
  };
  switch (family) {
    case Family::ISO_FRAC:
      cs(2); as(2);
      break;
    case Family::ISO_FRAC_GEO_ANISO:
      cs(2); as(2);
      out.push_back("c");
      out.push_back("phi");
      break;
    case Family::AXIS_ANISO:
      cs(dim); as(dim);
      break;
    case Family::AXIS_ANISO_ROT:
      cs(dim); as(dim);
      out.push_back("phi");
      break;
    case Family::TIME_SHIFTED:
      cs(dim); as(dim);
      for (int j = 1; j < dim; ++j) out.push_back("tau" + std::to_string(j));
      break;
  }
  return out;
}

std::vector<ParamInterval> DependenceModel::default_box(Family family, int dim) {
  std::vector<ParamInterval> box;
  for (const auto& name : param_names(family, dim)) {
    if (name[0] == 'C' || name == "c") box.push_back({1e-3, 50.0});
    else if (name.rfind("alpha", 0) == 0) box.push_back({1e-3, 2.0});
    else if (name == "phi") box.push_back({0.0, kHalfPi * (1.0 - 1e-9)});
    else box.push_back({-5.0, 5.0});  // tau
  }
  return box;
}

DependenceModel::DependenceModel(Family family, int dim, std::vector<double> params)
    : family_(family), dim_(dim), params_(std::move(params)) {
  if (dim_ < 2) throw std::invalid_argument("model: need at least 2 lag dimensions");
  if ((family_ == Family::ISO_FRAC_GEO_ANISO || family_ == Family::AXIS_ANISO_ROT) &&
      dim_ != 3)
    throw std::invalid_argument("model: rotated families require spatial dimension 2");
  if (static_cast<int>(params_.size()) != param_count(family_, dim_))
    throw std::invalid_argument("model: wrong parameter count for " +
                                family_name(family_));
  names_ = param_names(family_, dim_);
  box_ = default_box(family_, dim_);
  validate();
}

void DependenceModel::validate() const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const std::string& name = names_[i];
    double v = params_[i];
    if (!std::isfinite(v))
      throw std::invalid_argument("model: non-finite parameter " + name);
    if ((name[0] == 'C' || name == "c") && v <= 0.0)
      throw std::invalid_argument("model: " + name + " must be positive");
    if (name.rfind("alpha", 0) == 0 && (v <= 0.0 || v > 2.0))
      throw std::invalid_argument("model: " + name + " must lie in (0, 2]");
    if (name == "phi" && (v < 0.0 || v >= kHalfPi))
      throw std::invalid_argument("model: phi must lie in [0, pi/2)");
    if (v < box_[i].lo - 1e-12 || v > box_[i].hi + 1e-12)
      throw std::invalid_argument("model: parameter " + name + " outside box");
  }
}

void DependenceModel::set_box(std::vector<ParamInterval> box) {
  if (box.size() != params_.size())
    throw std::invalid_argument("model: box size mismatch");
  for (const auto& iv : box)
    if (!(iv.lo <= iv.hi)) throw std::invalid_argument("model: empty box interval");
  box_ = std::move(box);
  validate();
}

DependenceModel DependenceModel::with_params(std::vector<double> params) const {
  DependenceModel m(family_, dim_, std::move(params));
  m.box_ = box_;
  m.validate();
  return m;
}

double DependenceModel::dependence(std::span<const double> lag) const {
  if (static_cast<int>(lag.size()) != dim_)
    throw std::invalid_argument("dependence: lag dimension mismatch");
  const auto& p = params_;
  const int d = dim_;
  switch (family_) {
    case Family::ISO_FRAC: {
      double ss = 0.0;
      for (int j = 0; j + 1 < d; ++j) ss += lag[j] * lag[j];
      return p[0] * std::pow(std::sqrt(ss), p[2]) +
             p[1] * std::pow(std::abs(lag[d - 1]), p[3]);
    }
    case Family::ISO_FRAC_GEO_ANISO: {
      const double c = p[4], phi = p[5];
      const double h1 = lag[0] * std::cos(phi) - lag[1] * std::sin(phi);
      const double h2 = c * (lag[0] * std::sin(phi) + lag[1] * std::cos(phi));
      const double ns = std::sqrt(h1 * h1 + h2 * h2);
      return p[0] * std::pow(ns, p[2]) + p[1] * std::pow(std::abs(lag[2]), p[3]);
    }
    case Family::AXIS_ANISO: {
      double s = 0.0;
      for (int j = 0; j < d; ++j)
        s += p[j] * std::pow(std::abs(lag[j]), p[d + j]);
      return s;
    }
    case Family::AXIS_ANISO_ROT: {
      const double phi = p[2 * d];
      const double h1 = lag[0] * std::cos(phi) - lag[1] * std::sin(phi);
      const double h2 = lag[0] * std::sin(phi) + lag[1] * std::cos(phi);
      return p[0] * std::pow(std::abs(h1), p[d]) +
             p[1] * std::pow(std::abs(h2), p[d + 1]) +
             p[2] * std::pow(std::abs(lag[2]), p[d + 2]);
    }
    case Family::TIME_SHIFTED: {
      const double u = lag[d - 1];
      double s = p[d - 1] * std::pow(std::abs(u), p[2 * d - 1]);
      for (int j = 0; j + 1 < d; ++j)
        s += p[j] * std::pow(std::abs(lag[j] - u * p[2 * d + j]), p[d + j]);
      return s;
    }
  }
  throw std::logic_error("unknown family");
}

double DependenceModel::dependence(const Lag& lag) const {
  return dependence(std::span<const double>(lag.full()));
}

std::string DependenceModel::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family_);
  j["dim"] = dim_;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json box = nlohmann::json::object();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    params[names_[i]] = params_[i];
    box[names_[i]] = {box_[i].lo, box_[i].hi};
  }
  j["params"] = params;
  j["box"] = box;
  return j.dump(2);
}

DependenceModel DependenceModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Family fam = family_from_name(j.at("family").get<std::string>());
  int dim = j.at("dim").get<int>();
  auto names = param_names(fam, dim);
  std::vector<double> params;
  for (const auto& n : names) params.push_back(j.at("params").at(n).get<double>());
  DependenceModel m(fam, dim, std::move(params));
  if (j.contains("box")) {
    std::vector<ParamInterval> box;
    for (const auto& n : names) {
      auto iv = j.at("box").at(n);
      box.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    }
    m.set_box(std::move(box));
  }
  return m;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double tilde_phi(double delta, double ratio) {
  if (!(ratio > 0.0)) throw std::invalid_argument("tilde_phi: ratio must be > 0");
  if (delta < 0.0) throw std::invalid_argument("tilde_phi: negative dependence value");
  if (delta == 0.0) {
    if (ratio == 1.0) return 0.5;  // limit value
    throw std::runtime_error("tilde_phi: singular lag (delta = 0, ratio != 1)");
  }
  return norm_cdf(std::log(ratio) / std::sqrt(2.0 * delta) + std::sqrt(delta / 2.0));
}

double exponent_measure_v2(double delta, double y1, double y2) {
  if (!(y1 > 0.0) || !(y2 > 0.0))
    throw std::invalid_argument("exponent_measure_v2: levels must be > 0");
  const bool i1 = !std::isfinite(y1), i2 = !std::isfinite(y2);
  if (i1 && i2) return 0.0;
  if (i1) return 1.0 / y2;
  if (i2) return 1.0 / y1;
  return tilde_phi(delta, y2 / y1) / y1 + tilde_phi(delta, y1 / y2) / y2;
}

namespace {
void check_set(const IntervalSet& s, const char* what) {
  if (!(s.lower > 0.0) || !(s.lower < s.upper))
    throw std::invalid_argument(std::string(what) + ": need 0 < lower < upper");
}
}  // namespace

double true_extremogram(double delta, const IntervalSet& A, const IntervalSet& B) {
  check_set(A, "true_extremogram: set A");
  check_set(B, "true_extremogram: set B");
  if (delta == 0.0) {
    if (A == B) return 1.0;
    throw std::runtime_error("true_extremogram: singular lag (delta = 0, A != B)");
  }
  const double pref =
      A.is_ray() ? A.lower : A.lower * A.upper / (A.upper - A.lower);
  const double v = -exponent_measure_v2(delta, A.upper, B.upper) +
                   exponent_measure_v2(delta, A.upper, B.lower) +
                   exponent_measure_v2(delta, A.lower, B.upper) -
                   exponent_measure_v2(delta, A.lower, B.lower);
  return pref * v;
}

double tail_dependence(double delta) {
  if (delta < 0.0) throw std::invalid_argument("tail_dependence: negative delta");
  return 2.0 * (1.0 - norm_cdf(std::sqrt(delta / 2.0)));
}

double extremal_coefficient(double delta) {
  if (delta < 0.0) throw std::invalid_argument("extremal_coefficient: negative delta");
  return 2.0 * norm_cdf(std::sqrt(delta / 2.0));
}

double pre_asymptotic_extremogram(double delta, const IntervalSet& A,
                                  const IntervalSet& B, double threshold) {
  check_set(A, "pre_asymptotic_extremogram: set A");
  check_set(B, "pre_asymptotic_extremogram: set B");
  if (!(threshold > 0.0))
    throw std::invalid_argument("pre_asymptotic_extremogram: threshold must be > 0");
  const double a = threshold;
  // bivariate CDF at the (possibly infinite) corner (a x, a y)
  auto cdf2 = [&](double x, double y) {
    return std::exp(-exponent_measure_v2(delta, a * x, a * y));
  };
  auto cdf1 = [&](double x) {
    return std::isfinite(x) ? std::exp(-1.0 / (a * x)) : 1.0;
  };
  const double num = cdf2(A.upper, B.upper) - cdf2(A.lower, B.upper) -
                     cdf2(A.upper, B.lower) + cdf2(A.lower, B.lower);
  const double den = cdf1(A.upper) - cdf1(A.lower);
  if (!(den > 0.0))
    throw std::runtime_error("pre_asymptotic_extremogram: P(X/a in A) = 0");
  return num / den;
}

namespace {
bool is_zero_lag(std::span<const double> lag) {
  for (double x : lag)
    if (x != 0.0) return false;
  return true;
}
}  // namespace

double true_extremogram(const DependenceModel& model, std::span<const double> lag,
                        const IntervalSet& A, const IntervalSet& B) {
  if (is_zero_lag(lag) && A == B) return 1.0;
  return true_extremogram(model.dependence(lag), A, B);
}

double tail_dependence(const DependenceModel& model, std::span<const double> lag) {
  return tail_dependence(model.dependence(lag));
}

double extremal_coefficient(const DependenceModel& model,
                            std::span<const double> lag) {
  return extremal_coefficient(model.dependence(lag));
}

double pre_asymptotic_extremogram(const DependenceModel& model,
                                  std::span<const double> lag, const IntervalSet& A,
                                  const IntervalSet& B, double threshold) {
  return pre_asymptotic_extremogram(model.dependence(lag), A, B, threshold);
}

double lag_norm(std::span<const double> v, LagNorm norm) {
  double s = 0.0;
  switch (norm) {
    case LagNorm::L1:
      for (double x : v) s += std::abs(x);
      return s;
    case LagNorm::L2:
      for (double x : v) s += x * x;
      return std::sqrt(s);
    case LagNorm::LINF:
      for (double x : v) s = std::max(s, std::abs(x));
      return s;
  }
  throw std::logic_error("unknown norm");
}

GrowthCheck check_variogram_growth(const DependenceModel& model, double C,
                                   double alpha, const std::vector<Coord>& fixed_lags,
                                   std::int64_t radius, LagNorm norm) {
  if (radius < 1) throw std::invalid_argument("check_variogram_growth: radius >= 1");
  if (!(C > 0.0) || !(alpha > 0.0) || alpha > 2.0)
    throw std::invalid_argument("check_variogram_growth: need C > 0, alpha in (0,2]");
  std::vector<Coord> fixed = fixed_lags;
  if (fixed.empty()) fixed.push_back({});
  const int q = static_cast<int>(fixed[0].size());
  const int w = model.dim() - q;
  if (w < 1) throw std::invalid_argument("check_variogram_growth: bad dimensions");

  GrowthCheck res{true, {}, kInf};
  Coord vi(w, -radius);
  for (;;) {
    std::vector<double> vid(vi.begin(), vi.end());
    const double nv = lag_norm(vid, norm);
    if (nv <= static_cast<double>(radius)) {
      const double bound = C * std::pow(nv, alpha);
      for (const auto& vf : fixed) {
        std::vector<double> lag;
        for (auto x : vf) lag.push_back(static_cast<double>(x));
        for (auto x : vi) lag.push_back(static_cast<double>(x));
        const double margin = model.dependence(lag) - bound;
        if (margin < res.worst_margin) {
          res.worst_margin = margin;
          res.worst_lag = Lag{vf, vi};
        }
      }
    }
    int j = w - 1;
    while (j >= 0 && vi[j] == radius) vi[j--] = -radius;
    if (j < 0) break;
    ++vi[j];
  }
  res.pass = res.worst_margin >= 0.0;
  return res;
}

}  // namespace extremo
