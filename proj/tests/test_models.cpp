#include "doctest.h"

#include <cmath>
#include <numbers>

#include "extremo/models.hpp"
#include "extremo/rng.hpp"

using namespace extremo;

namespace {
double dep(const DependenceModel& m, std::vector<double> lag) {
  return m.dependence(std::span<const double>(lag));
}
}  // namespace

TEST_CASE("dependence function values") {
  DependenceModel iso(Family::ISO_FRAC, 3, {0.8, 0.4, 1.5, 1.0});
  CHECK(dep(iso, {3, 4, 2}) ==
        doctest::Approx(0.8 * std::pow(5.0, 1.5) + 0.4 * 2).epsilon(1e-12));
  CHECK(dep(iso, {0, 0, 0}) == 0.0);
  CHECK(dep(iso, {-3, -4, -2}) == dep(iso, {3, 4, 2}));  // symmetry

  DependenceModel ts(Family::TIME_SHIFTED, 3,
                     {0.4, 0.8, 0.5, 1.5, 1.5, 1.0, 1.0, 1.0});
  CHECK(dep(ts, {2, 2, 2}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("model validation") {
  CHECK_THROWS(DependenceModel(Family::ISO_FRAC, 3, {0.8, 0.4, 2.5, 1.0}));
  CHECK_THROWS(DependenceModel(Family::ISO_FRAC, 3, {-0.8, 0.4, 1.5, 1.0}));
  CHECK_THROWS(DependenceModel(Family::ISO_FRAC, 3, {0.8, 0.4, 1.5}));
  CHECK_THROWS(DependenceModel(Family::ISO_FRAC_GEO_ANISO, 4,
                               {0.8, 0.4, 1.5, 1.0, 2.0, 0.5}));
}

TEST_CASE("tilde_phi") {
  CHECK(tilde_phi(2.0, 1.0) == doctest::Approx(0.841345).epsilon(1e-5));
  for (double d : {0.3, 1.0, 7.5})
    CHECK(tilde_phi(d, 1.0) == doctest::Approx(norm_cdf(std::sqrt(d / 2))));
  CHECK(tilde_phi(1e6, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tilde_phi(0.0, 1.0) == 0.5);
  CHECK_THROWS(tilde_phi(0.0, 2.0));
}

TEST_CASE("exponent measure V2") {
  CHECK(exponent_measure_v2(1e-12, 3.0, 3.0) == doctest::Approx(1.0 / 3.0));
  CHECK(exponent_measure_v2(1e6, 3.0, 3.0) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(exponent_measure_v2(2.0, 25.0, 25.0) ==
        doctest::Approx((2.0 / 25.0) * 0.841345).epsilon(1e-5));
}

TEST_CASE("V2 homogeneity and bounds at random inputs") {
  Rng rng(100);
  for (int i = 0; i < 100; ++i) {
    const double d = rng.uniform(0.05, 10.0);
    const double y1 = rng.uniform(0.2, 30.0), y2 = rng.uniform(0.2, 30.0);
    const double t = rng.uniform(0.1, 10.0);
    const double v = exponent_measure_v2(d, y1, y2);
    CHECK(std::abs(exponent_measure_v2(d, t * y1, t * y2) - v / t) <= 1e-12);
    CHECK(v >= std::max(1 / y1, 1 / y2) - 1e-12);
    CHECK(v <= 1 / y1 + 1 / y2 + 1e-12);
  }
}

TEST_CASE("extremogram closed forms") {
  IntervalSet ray{1.0};
  CHECK(true_extremogram(2.0, ray, ray) == doctest::Approx(0.317311).epsilon(1e-5));
  CHECK(true_extremogram(0.0, ray, ray) == 1.0);
  CHECK(true_extremogram(1e6, ray, ray) <= 1e-6);
  CHECK(tail_dependence(0.0) == 1.0);
  CHECK(tail_dependence(2.0) == doctest::Approx(0.317311).epsilon(1e-5));
  CHECK(tail_dependence(8.0) == doctest::Approx(0.0455003).epsilon(1e-5));
  CHECK(extremal_coefficient(0.0) == doctest::Approx(1.0));
  CHECK(extremal_coefficient(1e8) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(extremal_coefficient(2.0) == doctest::Approx(1.682689).epsilon(1e-5));
}

TEST_CASE("identity chain at random model/lag pairs") {
  Rng rng(7);
  IntervalSet ray{1.0};
  for (int i = 0; i < 100; ++i) {
    DependenceModel m(Family::ISO_FRAC, 3,
                      {rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0),
                       rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)});
    std::vector<double> lag{rng.uniform(-4, 4), rng.uniform(-4, 4),
                            rng.uniform(-4, 4)};
    const double td = tail_dependence(m, lag);
    CHECK(std::abs(td - true_extremogram(m, lag, ray, ray)) <= 1e-12);
    CHECK(std::abs(td - (2.0 - extremal_coefficient(m, lag))) <= 1e-12);
  }
}

TEST_CASE("ray extremogram monotone in delta") {
  IntervalSet ray{1.0};
  double prev = 1.0;
  for (double d = 0.0; d <= 12.0; d += 0.25) {
    const double v = true_extremogram(d, ray, ray);
    CHECK(v <= prev + 1e-14);
    prev = v;
  }
}

TEST_CASE("bounded interval sets") {
  IntervalSet a{1.0, 3.0}, ray{1.0};
  // bounded-set value is finite, non-negative, and consistent with the ray
  // limit as the upper endpoint grows
  const double v = true_extremogram(2.0, a, a);
  CHECK(v >= 0.0);
  IntervalSet widening{1.0, 1e9};
  CHECK(true_extremogram(2.0, widening, widening) ==
        doctest::Approx(true_extremogram(2.0, ray, ray)).epsilon(1e-6));
}

TEST_CASE("pre-asymptotic extremogram") {
  IntervalSet ray{1.0};
  CHECK(pre_asymptotic_extremogram(2.0, ray, ray, 25.0) ==
        doctest::Approx(0.339927).epsilon(1e-5));
  CHECK(pre_asymptotic_extremogram(2.0, ray, ray, 1e6) ==
        doctest::Approx(true_extremogram(2.0, ray, ray)).epsilon(1e-5));
  // first-order expansion agreement
  const double rho = true_extremogram(2.0, ray, ray);
  const double a = 25.0;
  const double expansion = rho + (1.0 / (2 * a)) * (rho - 2) * (rho - 1);
  CHECK(std::abs(pre_asymptotic_extremogram(2.0, ray, ray, a) - expansion) <=
        4e-4);
}

TEST_CASE("pre-asymptotic expansion ratio tends to 1") {
  IntervalSet ray{1.0};
  for (double delta : {0.5, 2.0, 8.0}) {
    const double rho = true_extremogram(delta, ray, ray);
    double prev_err = 1e9;
    for (double a : {1e2, 1e3, 1e4}) {
      const double lhs = pre_asymptotic_extremogram(delta, ray, ray, a) - rho;
      const double rhs = (1.0 / (2 * a)) * (rho - 2) * (rho - 1);
      const double rel = std::abs(lhs / rhs - 1.0);
      CHECK(rel < prev_err + 1e-9);
      prev_err = rel;
    }
    CHECK(prev_err < 5e-3);
  }
}

TEST_CASE("rotation and shift consistency") {
  Rng rng(3);
  DependenceModel ax(Family::AXIS_ANISO, 3, {0.5, 0.9, 0.3, 1.2, 0.7, 1.1});
  DependenceModel rot(Family::AXIS_ANISO_ROT, 3,
                      {0.5, 0.9, 0.3, 1.2, 0.7, 1.1, 0.0});
  DependenceModel iso(Family::ISO_FRAC, 3, {0.8, 0.4, 1.5, 1.0});
  DependenceModel geo(Family::ISO_FRAC_GEO_ANISO, 3,
                      {0.8, 0.4, 1.5, 1.0, 1.0, 0.0});
  DependenceModel ts(Family::TIME_SHIFTED, 3,
                     {0.5, 0.9, 0.3, 1.2, 0.7, 1.1, 0.0, 0.0});
  for (int i = 0; i < 50; ++i) {
    std::vector<double> lag{rng.uniform(-5, 5), rng.uniform(-5, 5),
                            rng.uniform(-5, 5)};
    CHECK(dep(rot, lag) == doctest::Approx(dep(ax, lag)).epsilon(1e-12));
    CHECK(dep(geo, lag) == doctest::Approx(dep(iso, lag)).epsilon(1e-12));
    CHECK(dep(ts, lag) == doctest::Approx(dep(ax, lag)).epsilon(1e-12));
  }
}

TEST_CASE("variogram growth check") {
  DependenceModel iso(Family::ISO_FRAC, 3, {0.8, 0.4, 1.5, 1.0});
  std::vector<Coord> fixed{{0, 0}, {1, 0}, {0, 1}, {2, 2}};
  auto ok = check_variogram_growth(iso, 0.4, 1.0, fixed, 6);
  CHECK(ok.pass);
  auto bad = check_variogram_growth(iso, 10.0, 2.0, fixed, 6);
  CHECK(!bad.pass);
  // single shell with C = delta(e_t)/2
  std::vector<double> unit{0, 0, 1};
  auto shell = check_variogram_growth(iso, dep(iso, unit) / 2, 1.7, {{0, 0}}, 1);
  CHECK(shell.pass);
}

TEST_CASE("model JSON round trip") {
  DependenceModel m(Family::ISO_FRAC_GEO_ANISO, 3,
                    {0.8, 0.4, 1.5, 0.5, 3.0, std::numbers::pi / 4});
  auto m2 = DependenceModel::from_json(m.to_json());
  CHECK(m2.family() == m.family());
  CHECK(m2.dim() == m.dim());
  for (std::size_t i = 0; i < m.params().size(); ++i)
    CHECK(m2.params()[i] == m.params()[i]);
}
