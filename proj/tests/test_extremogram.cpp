#include "doctest.h"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "extremo/extremogram.hpp"
#include "extremo/rng.hpp"

using namespace extremo;

TEST_CASE("threshold is the ceil(level N) order statistic") {
  ObservationDomain dom({{}}, 100, 1);
  SpaceTimeField f{&dom, {}};
  for (int i = 100; i >= 1; --i) f.values.push_back(i);  // unsorted on purpose
  CHECK(select_threshold(f, 0.96).realized == 96.0);
  CHECK(select_threshold(f, 0.955).realized == 96.0);
  CHECK(select_threshold(f, 0.001).realized == 1.0);
  CHECK(select_threshold(f, 0.999).realized == 100.0);
  CHECK(!select_threshold(f, 0.5).degenerate);
  CHECK_THROWS(select_threshold(f, 0.0));
  CHECK_THROWS(select_threshold(f, 1.0));

  SpaceTimeField flat{&dom, std::vector<double>(100, 7.0)};
  CHECK(select_threshold(flat, 0.9).degenerate);
}

TEST_CASE("hand-computed ratio estimate") {
  ObservationDomain dom({{}}, 5, 1);
  SpaceTimeField f{&dom, {10, 12, 0.5, 11, 9}};
  ThresholdSpec thr{0.8, 1.0, false};
  IntervalSet ray{1.0};
  auto est = empirical_extremogram(f, {Lag{{}, {1}}}, thr, ray, ray);
  REQUIRE(est.size() == 1);
  // numerator pairs: (10,12) and (11,9); closure 4; exceedances 4 of 5
  CHECK(est[0].numerator_count == 2);
  CHECK(est[0].numerator_sites == 4);
  CHECK(est[0].denominator_count == 4);
  CHECK(est[0].denominator_sites == 5);
  CHECK(est[0].value == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("zero lag with equal sets gives exactly one") {
  ObservationDomain dom({{}}, 50, 1);
  SpaceTimeField f{&dom, {}};
  Rng rng(5);
  for (int i = 0; i < 50; ++i) f.values.push_back(1.0 / rng.uniform());
  auto thr = select_threshold(f, 0.9);
  IntervalSet ray{1.0};
  auto est = empirical_extremogram(f, {Lag{{}, {0}}}, thr, ray, ray);
  CHECK(est[0].value == 1.0);
}

TEST_CASE("degenerate inputs raise errors") {
  ObservationDomain dom({{}}, 5, 1);
  SpaceTimeField f{&dom, {1, 2, 3, 4, 5}};
  IntervalSet ray{1.0};
  std::vector<Lag> unit{Lag{{}, {1}}}, too_long{Lag{{}, {7}}};
  // threshold above every value: empty denominator
  ThresholdSpec high{0.99, 100.0, false};
  CHECK_THROWS_AS(empirical_extremogram(f, unit, high, ray, ray),
                  std::runtime_error);
  // lag longer than the series: empty closure
  ThresholdSpec thr{0.5, 2.5, false};
  CHECK_THROWS_AS(empirical_extremogram(f, too_long, thr, ray, ray),
                  std::runtime_error);
}

TEST_CASE("set membership is strict") {
  ObservationDomain dom({{}}, 4, 1);
  // value exactly at the threshold must not count as an exceedance
  SpaceTimeField f{&dom, {1.0, 3.0, 3.0, 1.0}};
  ThresholdSpec thr{0.5, 1.0, false};
  IntervalSet ray{1.0};
  auto est = empirical_extremogram(f, {Lag{{}, {1}}}, thr, ray, ray);
  CHECK(est[0].denominator_count == 2);  // only the two 3.0 values
  CHECK(est[0].numerator_count == 1);    // the (3,3) pair
}

TEST_CASE("first-order correction shrinks the pre-asymptotic bias") {
  IntervalSet ray{1.0};
  const double a = 25.0, delta = 2.0;
  const double rho_inf = true_extremogram(delta, ray, ray);
  const double rho_pre = pre_asymptotic_extremogram(delta, ray, ray, a);

  ExtremogramEstimate e;
  e.value = rho_pre;
  e.threshold = ThresholdSpec{0.96, a, false};
  e.set_a = ray;
  e.set_b = ray;
  auto corrected = bias_correct({e}, BiasRegime::FIRST_ORDER);
  CHECK(corrected[0].bias_corrected);
  CHECK(corrected[0].value == doctest::Approx(0.318012).epsilon(1e-4));
  CHECK(std::abs(corrected[0].value - rho_inf) <
        0.05 * std::abs(rho_pre - rho_inf));

  // fixed points of the correction map
  for (double r : {1.0, 2.0}) {
    ExtremogramEstimate fp = e;
    fp.value = r;
    CHECK(bias_correct({fp}, BiasRegime::FIRST_ORDER)[0].value ==
          doctest::Approx(r).epsilon(1e-14));
  }

  // NONE is the identity
  auto none = bias_correct({e}, BiasRegime::NONE);
  CHECK(none[0].value == rho_pre);
  CHECK(!none[0].bias_corrected);

  // bounded sets are rejected
  ExtremogramEstimate bounded = e;
  bounded.set_a = IntervalSet{1.0, 3.0};
  CHECK_THROWS(bias_correct({bounded}, BiasRegime::FIRST_ORDER));
}

TEST_CASE("regime advice") {
  CHECK(regime_advise(100, 1, 3, 0.10) == RegimeAdvice::FIRST_ORDER);
  CHECK(regime_advise(100, 1, 3, 0.15) == RegimeAdvice::NONE);
  CHECK(regime_advise(100, 1, 3, 0.05) == RegimeAdvice::UNSUPPORTED);
  CHECK_THROWS(regime_advise(100, 1, 3, 0.20));
  CHECK_THROWS(regime_advise(100, 1, 3, 0.0));
}

namespace {

// Independent pair-enumeration oracle built on a coordinate lookup table.
struct OracleCounts {
  std::size_t num = 0, closure = 0, den = 0;
};

OracleCounts oracle(const SpaceTimeField& f, const Lag& h, double a,
                    const IntervalSet& A, const IntervalSet& B) {
  const ObservationDomain& dom = *f.domain;
  std::map<Coord, std::size_t> lookup;
  for (std::size_t i = 0; i < dom.size(); ++i) lookup[dom.site(i)] = i;
  auto in = [](double x, const IntervalSet& s) {
    return x > s.lower && x < s.upper;
  };
  OracleCounts c;
  const auto full = h.full();
  for (std::size_t i = 0; i < dom.size(); ++i) {
    if (in(f.values[i] / a, A)) ++c.den;
    Coord partner = dom.site(i);
    for (std::size_t k = 0; k < partner.size(); ++k)
      partner[k] += static_cast<std::int64_t>(full[k]);
    auto it = lookup.find(partner);
    if (it == lookup.end()) continue;
    ++c.closure;
    if (in(f.values[i] / a, A) && in(f.values[it->second] / a, B)) ++c.num;
  }
  return c;
}

}  // namespace

TEST_CASE("estimator matches a brute-force oracle on random fields") {
  Rng rng(31);
  std::vector<Coord> F{{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}};
  ObservationDomain dom(F, 12, 1);
  std::vector<Lag> lags{Lag{{0, 0}, {1}}, Lag{{1, 0}, {0}}, Lag{{1, 1}, {2}},
                        Lag{{-1, 0}, {3}}, Lag{{0, -1}, {-2}}};
  IntervalSet A{1.0}, B{1.0, 4.0};
  for (int trial = 0; trial < 30; ++trial) {
    SpaceTimeField f{&dom, {}};
    for (std::size_t i = 0; i < dom.size(); ++i)
      f.values.push_back(1.0 / rng.uniform());
    auto thr = select_threshold(f, 0.8);
    auto est = empirical_extremogram(f, lags, thr, A, B);
    for (std::size_t k = 0; k < lags.size(); ++k) {
      auto c = oracle(f, lags[k], thr.realized, A, B);
      CHECK(est[k].numerator_count == c.num);
      CHECK(est[k].numerator_sites == c.closure);
      CHECK(est[k].denominator_count == c.den);
      CHECK(est[k].value ==
            doctest::Approx((double(c.num) / c.closure) /
                            (double(c.den) / dom.size())).epsilon(1e-14));
    }
  }
}

TEST_CASE("estimates CSV round trip") {
  ObservationDomain dom({{1, 1}, {2, 1}}, 6, 1);
  SpaceTimeField f{&dom, {}};
  Rng rng(41);
  for (std::size_t i = 0; i < dom.size(); ++i)
    f.values.push_back(1.0 / rng.uniform());
  auto thr = select_threshold(f, 0.75);
  IntervalSet ray{1.0};
  std::vector<Lag> lags{Lag{{0, 0}, {1}}, Lag{{1, 0}, {2}}};
  auto est = empirical_extremogram(f, lags, thr, ray, ray);
  const std::string path = "/tmp/extremo_test_estimates.csv";
  save_estimates(est, 2, 1, path);
  auto back = load_estimates(path, 2, 1);
  REQUIRE(back.size() == est.size());
  for (std::size_t k = 0; k < est.size(); ++k) {
    CHECK(back[k].lag.fixed_part == est[k].lag.fixed_part);
    CHECK(back[k].lag.increasing_part == est[k].lag.increasing_part);
    CHECK(back[k].value == est[k].value);
    CHECK(back[k].numerator_count == est[k].numerator_count);
    CHECK(back[k].denominator_count == est[k].denominator_count);
    CHECK(back[k].bias_corrected == est[k].bias_corrected);
  }
}
