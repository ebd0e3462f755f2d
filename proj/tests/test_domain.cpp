#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "extremo/domain.hpp"

using namespace extremo;

namespace {
std::string tmpfile_path(const char* name) {
  return std::string("/tmp/extremo_test_") + name;
}
}  // namespace

TEST_CASE("domain site counts") {
  std::vector<Coord> F;
  for (int i = 1; i <= 15; ++i)
    for (int j = 1; j <= 15; ++j) F.push_back({i, j});
  ObservationDomain big(F, 300, 1);
  CHECK(big.size() == 225u * 300u);

  ObservationDomain cube({{}}, 40, 3);
  CHECK(cube.size() == 64000u);
  CHECK(cube.q() == 0);

  ObservationDomain tiny({{0}}, 1, 1);
  CHECK(tiny.size() == 1u);
}

TEST_CASE("domain rejects bad fixed sites") {
  CHECK_THROWS(ObservationDomain({{1, 1}, {1, 1}}, 5, 1));
  CHECK_THROWS(ObservationDomain({{1, 1}, {2}}, 5, 1));
}

TEST_CASE("canonical order and index round trip") {
  ObservationDomain dom({{3, 4}, {5, 6}}, 3, 1);
  // fixed sites outer, grid row-major inner
  CHECK(dom.site(0) == Coord{3, 4, 1});
  CHECK(dom.site(2) == Coord{3, 4, 3});
  CHECK(dom.site(3) == Coord{5, 6, 1});
  for (std::size_t i = 0; i < dom.size(); ++i)
    CHECK(dom.index_of(dom.site(i)) == i);
  CHECK(dom.index_of(Coord{9, 9, 1}) == ObservationDomain::npos);
}

TEST_CASE("shifted_index honours the lag decomposition") {
  ObservationDomain dom({{1, 1}, {1, 2}, {2, 1}, {2, 2}}, 4, 1);
  Lag h{{1, 0}, {2}};
  std::size_t from = dom.index_of(Coord{1, 1, 1});
  std::size_t to = dom.shifted_index(from, h);
  CHECK(dom.site(to) == Coord{2, 1, 3});
  // partner leaving the grid
  Lag off{{0, 0}, {4}};
  CHECK(dom.shifted_index(from, off) == ObservationDomain::npos);
}

TEST_CASE("lag_closure examples") {
  std::vector<Coord> z;
  for (int i = 1; i <= 5; ++i) z.push_back({i});
  CHECK(lag_closure(z, {0}) == z);
  CHECK(lag_closure(z, {2}) == std::vector<Coord>{{1}, {2}, {3}});

  std::vector<Coord> sq{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  CHECK(lag_closure(sq, {1, 1}) == std::vector<Coord>{{1, 1}});
  CHECK_THROWS(lag_closure(sq, {1}));
}

TEST_CASE("lag_closure size matches the rectangular formula") {
  std::vector<Coord> z;
  const int n = 5;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) z.push_back({i, j});
  for (std::int64_t h1 = -4; h1 <= 4; ++h1) {
    for (std::int64_t h2 = -4; h2 <= 4; ++h2) {
      auto c = lag_closure(z, {h1, h2});
      CHECK(c.size() ==
            static_cast<std::size_t>((n - std::abs(h1)) * (n - std::abs(h2))));
      for (const auto& s : c) {
        Coord shifted{s[0] + h1, s[1] + h2};
        CHECK(std::find(z.begin(), z.end(), shifted) != z.end());
      }
    }
  }
}

TEST_CASE("field save/load round trip") {
  ObservationDomain dom({{0}}, 1, 1);
  SpaceTimeField f{&dom, {3.5}};
  auto path = tmpfile_path("roundtrip.csv");
  save_field(f, path);
  auto g = load_field(path, dom);
  CHECK(g.values == f.values);

  ObservationDomain dom4({{1}, {2}}, 2, 1);
  SpaceTimeField f4{&dom4, {0.25, 1e300, 3.0e-12, 7.125}};
  save_field(f4, tmpfile_path("rt4.csv"));
  auto g4 = load_field(tmpfile_path("rt4.csv"), dom4);
  CHECK(g4.values == f4.values);

  // gz variant
  save_field(f4, tmpfile_path("rt4.csv.gz"));
  auto gz = load_field(tmpfile_path("rt4.csv.gz"), dom4);
  CHECK(gz.values == f4.values);
}

TEST_CASE("field load errors") {
  ObservationDomain dom({{1}, {2}}, 2, 1);
  SpaceTimeField f{&dom, {1.0, 2.0, 3.0, 4.0}};
  auto path = tmpfile_path("errs.csv");
  save_field(f, path);

  {  // drop one row
    std::ifstream in(path);
    std::string line, out;
    int k = 0;
    while (std::getline(in, line))
      if (k++ != 2) out += line + "\n";
    std::ofstream(tmpfile_path("missing.csv")) << out;
    CHECK_THROWS_WITH_AS(load_field(tmpfile_path("missing.csv"), dom),
                         doctest::Contains("missing"), std::runtime_error);
  }
  {  // NaN value
    std::ofstream out(tmpfile_path("nan.csv"));
    out << "f1,i1,value\n1,1,NaN\n1,2,1\n2,1,1\n2,2,1\n";
    out.close();
    CHECK_THROWS(load_field(tmpfile_path("nan.csv"), dom));
  }
  {  // non-positive with positivity flag
    std::ofstream out(tmpfile_path("neg.csv"));
    out << "f1,i1,value\n1,1,-2\n1,2,1\n2,1,1\n2,2,1\n";
    out.close();
    CHECK_NOTHROW(load_field(tmpfile_path("neg.csv"), dom, false));
    CHECK_THROWS(load_field(tmpfile_path("neg.csv"), dom, true));
  }
}

TEST_CASE("serialisation is byte stable") {
  ObservationDomain dom({{1, 1}, {2, 1}}, 3, 1);
  SpaceTimeField f{&dom, {1, 2, 3, 4, 5, 6.5}};
  save_field(f, tmpfile_path("stable1.csv"));
  save_field(f, tmpfile_path("stable2.csv"));
  std::ifstream a(tmpfile_path("stable1.csv")), b(tmpfile_path("stable2.csv"));
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());
}
