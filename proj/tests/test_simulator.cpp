#include "doctest.h"

#include <cmath>
#include <vector>

#include "extremo/simulator.hpp"
#include "ks.hpp"

using namespace extremo;

namespace {
DeltaFn abs_pow(double C, double a) {
  return [C, a](std::span<const double> h) {
    double ss = 0.0;
    for (double x : h) ss += x * x;
    return C * std::pow(std::sqrt(ss), a);
  };
}
}  // namespace

TEST_CASE("factor reconstructs the increment covariance") {
  std::vector<std::vector<double>> pts{{0}, {1}, {2}, {4}, {7}};
  auto delta = abs_pow(0.5, 1.3);
  auto f = build_factor_points(pts, delta);
  Eigen::MatrixXd recon = f.chol * f.chol.transpose();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      std::vector<double> d0i{pts[i][0] - pts[0][0]}, d0j{pts[j][0] - pts[0][0]},
          dij{pts[i][0] - pts[j][0]};
      const double gamma = delta(d0i) + delta(d0j) - delta(dij);
      const double extra = (i == j) ? f.jitter : 0.0;
      CHECK(recon(i, j) == doctest::Approx(gamma + extra).epsilon(1e-8));
    }
  }
}

TEST_CASE("degenerate single-point factor is zero") {
  auto f = build_factor_points({{3.0, 3.0}}, abs_pow(1.0, 1.0));
  CHECK(f.chol.rows() == 1);
  CHECK(f.chol(0, 0) == 0.0);
}

TEST_CASE("sample_pinned vanishes at the pin and matches moments") {
  std::vector<std::vector<double>> pts{{0}, {1}, {3}};
  auto delta = abs_pow(0.8, 1.4);
  auto f = build_factor_points(pts, delta);
  Rng rng(11);
  const int n = 20000;
  std::vector<double> s1(3, 0.0), s2(3, 0.0);
  double s12 = 0.0;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd g = sample_pinned(f, 0, rng);
    CHECK(g(0) == 0.0);
    for (int i = 0; i < 3; ++i) {
      s1[i] += g(i);
      s2[i] += g(i) * g(i);
    }
    s12 += g(1) * g(2);
  }
  // Var[G(s)] = 2 delta(s - pin), Cov = delta(s1) + delta(s2) - delta(s1-s2)
  for (int i = 1; i < 3; ++i) {
    const double var = s2[i] / n - (s1[i] / n) * (s1[i] / n);
    std::vector<double> h{pts[i][0]};
    CHECK(var == doctest::Approx(2.0 * delta(h)).epsilon(0.05));
  }
  std::vector<double> h1{1.0}, h2{3.0}, h12{2.0};
  const double cov = s12 / n - (s1[1] / n) * (s1[2] / n);
  CHECK(cov ==
        doctest::Approx(delta(h1) + delta(h2) - delta(h12)).epsilon(0.06));
}

TEST_CASE("dense and separable samplers agree on the dependence function") {
  std::vector<Coord> F{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  ObservationDomain dom(F, 3, 1);
  DependenceModel model(Family::ISO_FRAC, 3, {0.8, 0.4, 1.5, 1.0});
  SimOptions dense_opts, sep_opts;
  dense_opts.sampler = SamplerKind::DENSE;
  sep_opts.sampler = SamplerKind::SEPARABLE;
  auto dense = make_sampler(model, dom, dense_opts);
  auto sep = make_sampler(model, dom, sep_opts);
  REQUIRE(dense->size() == dom.size());
  REQUIRE(sep->size() == dom.size());
  std::vector<double> a, b;
  for (std::size_t k : {std::size_t{0}, std::size_t{5}, dom.size() - 1}) {
    dense->delta_to(k, a);
    sep->delta_to(k, b);
    for (std::size_t i = 0; i < dom.size(); ++i)
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("separable sampler has the right increment variances") {
  std::vector<Coord> F{{0, 0}, {2, 0}, {0, 3}};
  ObservationDomain dom(F, 3, 1);
  DependenceModel model(Family::TIME_SHIFTED, 3,
                        {0.5, 0.9, 0.3, 1.2, 0.7, 1.1, 0.4, -0.2});
  SimOptions opts;
  opts.sampler = SamplerKind::SEPARABLE;
  auto s = make_sampler(model, dom, opts);
  Rng rng(17);
  const int n = 20000;
  const std::size_t m = dom.size();
  std::vector<double> w, mean(m, 0.0), mean_sq(m * m, 0.0);
  for (int k = 0; k < n; ++k) {
    s->sample_increments(rng, w);
    for (std::size_t i = 0; i < m; ++i) {
      mean[i] += w[i] / n;
      for (std::size_t j = 0; j < m; ++j) mean_sq[i * m + j] += w[i] * w[j] / n;
    }
  }
  // Var[W(s_i) - W(s_j)] = 2 delta(s_i - s_j)
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double var = (mean_sq[i * m + i] - mean[i] * mean[i]) +
                         (mean_sq[j * m + j] - mean[j] * mean[j]) -
                         2.0 * (mean_sq[i * m + j] - mean[i] * mean[j]);
      Coord si = dom.site(i), sj = dom.site(j);
      std::vector<double> diff;
      for (std::size_t c = 0; c < si.size(); ++c)
        diff.push_back(static_cast<double>(si[c] - sj[c]));
      CHECK(var == doctest::Approx(2.0 * model.dependence(diff)).epsilon(0.07));
    }
  }
}

TEST_CASE("single-site margins are standard Frechet") {
  ObservationDomain dom({{0}}, 1, 1);
  DependenceModel model(Family::ISO_FRAC, 2, {1.0, 1.0, 1.0, 1.0});
  auto sampler = make_sampler(model, dom);
  Rng rng(23);
  std::vector<double> draws;
  for (int k = 0; k < 10000; ++k)
    draws.push_back(simulate_brown_resnick(*sampler, dom, rng).values[0]);
  const double d =
      ks_statistic(draws, [](double x) { return std::exp(-1.0 / x); });
  CHECK(ks_pvalue(d, draws.size()) > 0.01);
}

TEST_CASE("pairwise extremal coefficient matches the closed form") {
  // two sites one time step apart with delta = 2
  ObservationDomain dom({{0}}, 2, 1);
  DependenceModel model(Family::ISO_FRAC, 2, {1.0, 2.0, 1.0, 1.0});
  auto sampler = make_sampler(model, dom);
  Rng rng(29);
  int both_below = 0;
  const int n = 6000;
  for (int k = 0; k < n; ++k) {
    auto f = simulate_brown_resnick(*sampler, dom, rng);
    if (f.values[0] <= 1.0 && f.values[1] <= 1.0) ++both_below;
  }
  // P(Z1 <= 1, Z2 <= 1) = exp(-theta) with theta = 2 Phi(1)
  const double theta_hat =
      -std::log(static_cast<double>(both_below) / static_cast<double>(n));
  CHECK(theta_hat == doctest::Approx(extremal_coefficient(2.0)).epsilon(0.06));
}

TEST_CASE("simulation is deterministic in the seed") {
  std::vector<Coord> F{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  ObservationDomain dom(F, 5, 1);
  DependenceModel model(Family::ISO_FRAC, 3, {0.8, 0.4, 1.5, 1.0});
  Rng r1(42), r2(42), r3(43);
  auto f1 = simulate_brown_resnick(model, dom, r1);
  auto f2 = simulate_brown_resnick(model, dom, r2);
  auto f3 = simulate_brown_resnick(model, dom, r3);
  CHECK(f1.values == f2.values);
  CHECK(f1.values != f3.values);
  for (double v : f1.values) CHECK(v > 0.0);
}
