#include "extremo/extremogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace extremo {

ThresholdSpec select_threshold(const SpaceTimeField& field, double level) {
  if (field.values.empty()) throw std::invalid_argument("select_threshold: empty field");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("select_threshold: level must be in (0,1)");
  std::vector<double> sorted = field.values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(n)));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  ThresholdSpec spec;
  spec.quantile_level = level;
  spec.realized = sorted[idx - 1];
  spec.degenerate = (sorted.front() == sorted.back());
  return spec;
}

namespace {
inline bool in_set(double x, const IntervalSet& s) {
  return x > s.lower && x < s.upper;
}

std::string lag_str(const Lag& h) {
  std::string out = "(";
  for (auto c : h.fixed_part) out += std::to_string(c) + ",";
  for (auto c : h.increasing_part) out += std::to_string(c) + ",";
  if (out.back() == ',') out.pop_back();
  return out + ")";
}
}  // namespace

std::vector<ExtremogramEstimate> empirical_extremogram(
    const SpaceTimeField& field, const std::vector<Lag>& lags,
    const ThresholdSpec& threshold, const IntervalSet& A, const IntervalSet& B) {
  const ObservationDomain& dom = *field.domain;
  const double a = threshold.realized;
  if (!(a > 0.0))
    throw std::invalid_argument("empirical_extremogram: non-positive threshold");

  const std::size_t n = dom.size();
  std::size_t den_count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (in_set(field.values[i] / a, A)) ++den_count;
  if (den_count == 0)
    throw std::runtime_error(
        "empirical_extremogram: no exceedances of threshold " +
        std::to_string(a) + "; estimate undefined");

  std::vector<ExtremogramEstimate> out;
  out.reserve(lags.size());
  for (const Lag& h : lags) {
    std::size_t closure = 0, num = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = dom.shifted_index(i, h);
      if (j == ObservationDomain::npos) continue;
      ++closure;
      if (in_set(field.values[i] / a, A) && in_set(field.values[j] / a, B)) ++num;
    }
    if (closure == 0)
      throw std::runtime_error("empirical_extremogram: empty lag closure at lag " +
                               lag_str(h));
    ExtremogramEstimate e;
    e.lag = h;
    e.numerator_count = num;
    e.numerator_sites = closure;
    e.denominator_count = den_count;
    e.denominator_sites = n;
    e.value = (static_cast<double>(num) / static_cast<double>(closure)) /
              (static_cast<double>(den_count) / static_cast<double>(n));
    e.threshold = threshold;
    e.set_a = A;
    e.set_b = B;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ExtremogramEstimate> bias_correct(
    const std::vector<ExtremogramEstimate>& estimates, BiasRegime regime) {
  std::vector<ExtremogramEstimate> out = estimates;
  if (regime == BiasRegime::NONE) return out;
  for (auto& e : out) {
    if (!e.set_a.is_ray() || !e.set_b.is_ray())
      throw std::runtime_error(
          "bias_correct: first-order correction only covers ray sets");
    const double a = e.threshold.realized;
    const double al = e.set_a.lower, bl = e.set_b.lower;
    const double r = e.value;
    e.value = r - (r - 2.0 * al / bl) * (r - 1.0) / (2.0 * a * al);
    e.bias_corrected = true;
  }
  return out;
}

RegimeAdvice regime_advise(std::int64_t /*n*/, int w, int d, double beta1) {
  const double wd = static_cast<double>(w) / static_cast<double>(d);
  if (!(beta1 > 0.0 && beta1 < wd / 2.0))
    throw std::invalid_argument("regime_advise: beta1 must lie in (0, w/(2d))");
  if (beta1 <= wd / 5.0) return RegimeAdvice::UNSUPPORTED;
  if (beta1 <= wd / 3.0) return RegimeAdvice::FIRST_ORDER;
  return RegimeAdvice::NONE;
}

void save_estimates(const std::vector<ExtremogramEstimate>& estimates, int q, int w,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (int j = 1; j <= q; ++j) out << "hf" << j << ",";
  for (int j = 1; j <= w; ++j) out << "hi" << j << ",";
  out << "value,num_count,num_sites,den_count,den_sites,corrected\n";
  char buf[64];
  for (const auto& e : estimates) {
    for (auto c : e.lag.fixed_part) out << c << ",";
    for (auto c : e.lag.increasing_part) out << c << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", e.value);
    out << buf << "," << e.numerator_count << "," << e.numerator_sites << ","
        << e.denominator_count << "," << e.denominator_sites << ","
        << (e.bias_corrected ? 1 : 0) << "\n";
  }
}

std::vector<ExtremogramEstimate> load_estimates(const std::string& path, int q,
                                                int w) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty estimates file");
  std::vector<ExtremogramEstimate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (static_cast<int>(cols.size()) != q + w + 6)
      throw std::runtime_error("bad estimates row: " + line);
    ExtremogramEstimate e;
    int c = 0;
    for (int j = 0; j < q; ++j) e.lag.fixed_part.push_back(std::stoll(cols[c++]));
    for (int j = 0; j < w; ++j)
      e.lag.increasing_part.push_back(std::stoll(cols[c++]));
    e.value = std::stod(cols[c++]);
    e.numerator_count = std::stoull(cols[c++]);
    e.numerator_sites = std::stoull(cols[c++]);
    e.denominator_count = std::stoull(cols[c++]);
    e.denominator_sites = std::stoull(cols[c++]);
    e.bias_corrected = cols[c++] == "1";
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace extremo
