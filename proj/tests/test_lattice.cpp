#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"

using namespace gw;

TEST_CASE("default truncation follows the cell size") {
  const auto s = LatticeSpec::make(1, 5, 2.0);
  CHECK(s.cell_side() == doctest::Approx(2.0 / 32));
  CHECK(s.t_min == doctest::Approx(2.0 / 32 / 4));
  CHECK(s.t_max == doctest::Approx(8.0));
  CHECK(LatticeSpec::make(2, 3).cell_count() == 64);
}

TEST_CASE("invalid lattices are rejected") {
  CHECK_THROWS_AS(LatticeSpec::make(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(LatticeSpec::make(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(LatticeSpec::make(1, 13), std::invalid_argument);
  CHECK_THROWS_AS(LatticeSpec::make(1, 4, -1.0), std::invalid_argument);
  auto s = LatticeSpec::make(1, 4);
  s.t_min = s.t_max;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("flat and coordinate indices round trip") {
  const auto s = LatticeSpec::make(2, 3, 1.0, {-1.0, 2.0});
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    CHECK(s.flat_index(s.cell_coords(c)) == c);
    const auto p = s.cell_center(c);
    const auto ij = s.cell_coords(c);
    CHECK(p[0] == doctest::Approx(-1.0 + (ij[0] + 0.5) / 8.0));
    CHECK(p[1] == doctest::Approx(2.0 + (ij[1] + 0.5) / 8.0));
    CHECK(s.locate(p) == c);
  }
}

TEST_CASE("locate is half-open") {
  const auto s = LatticeSpec::make(1, 2);
  CHECK(s.locate({0.0, 0.0}) == std::size_t{0});
  CHECK(s.locate({0.25, 0.0}) == std::size_t{1});
  CHECK_FALSE(s.locate({1.0, 0.0}).has_value());
  CHECK_FALSE(s.locate({-1e-12, 0.0}).has_value());
}

TEST_CASE("lebesgue weight has unit density") {
  const auto s = LatticeSpec::make(2, 4, 3.0);
  const auto w = Weight::lebesgue(s);
  CHECK(w.total() == doctest::Approx(9.0));
  const auto grid = DyadicGrid::standard(s, 2);
  const auto q = grid.cube(2, {1, 3});
  CHECK(mass(w, q) == doctest::Approx(std::pow(3.0 / 4, 2)));
}

TEST_CASE("weights reject negative masses") {
  const auto s = LatticeSpec::make(1, 2);
  CHECK_THROWS_AS(Weight(s, {1.0, -1.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Weight(s, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("integrals against hand sums") {
  const auto s = LatticeSpec::make(1, 3);
  const Weight w(s, {1, 2, 3, 4, 5, 6, 7, 8});
  const GridFunction f(s, {1, -1, 2, -2, 0.5, 0, 3, 1});
  const auto grid = DyadicGrid::standard(s, 2);
  CHECK(integrate(f, w, grid.cube(1, {0, 0})) == doctest::Approx(1 - 2 + 6 - 8));
  CHECK(integrate(f, w, grid.cube(1, {1, 0})) == doctest::Approx(2.5 + 0 + 21 + 8));
  double sq = 0.0;
  for (std::size_t c = 0; c < 8; ++c) sq += f[c] * f[c] * w[c];
  CHECK(l2_norm(f, w) == doctest::Approx(std::sqrt(sq)));
  const auto r = w.restricted(grid.cube(2, {3, 0}));
  CHECK(r.total() == doctest::Approx(15.0));
  CHECK(w.scaled(2.0).total() == doctest::Approx(72.0));
}

TEST_CASE("cubes from another lattice are refused") {
  const auto a = LatticeSpec::make(1, 3);
  const auto b = LatticeSpec::make(1, 4);
  const auto grid = DyadicGrid::standard(b, 2);
  CHECK_THROWS_AS(mass(Weight::lebesgue(a), grid.top()), std::domain_error);
}

TEST_CASE("signed atoms skip empty cells") {
  const auto s = LatticeSpec::make(1, 2);
  const Weight w(s, {0, 1, 0, 2});
  const GridFunction f(s, {5, -1, 5, 0});
  const auto a = atoms_of(f, w);
  REQUIRE(a.masses.size() == 1);
  CHECK(a.masses[0] == -1.0);
  CHECK(a.positions[0][0] == doctest::Approx(0.375));
  CHECK(atoms_of(w).masses.size() == 2);
}

TEST_CASE("weight csv round trip") {
  const auto s = LatticeSpec::make(2, 2);
  std::vector<double> m(16, 0.0);
  m[3] = 0.25;
  m[9] = 1.5;
  const Weight w(s, m);
  std::stringstream buf;
  write_weight_csv(buf, w);
  const auto back = read_weight_csv(buf, s);
  for (std::size_t c = 0; c < 16; ++c) CHECK(back[c] == w[c]);
}

TEST_CASE("csv atoms snap to cells and accumulate") {
  const auto s = LatticeSpec::make(1, 2);
  std::istringstream in("x1,mass\n0.01,1\n0.2,2\n0.8,0.5\n\n");
  const auto w = read_weight_csv(in, s);
  CHECK(w[0] == 3.0);
  CHECK(w[3] == 0.5);
}

TEST_CASE("csv errors carry the line number") {
  const auto s = LatticeSpec::make(1, 2);
  std::istringstream bad("x1,mass\n0.1,1\n0.2,abc\n");
  try {
    read_weight_csv(bad, s);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream neg("x1,mass\n0.1,-1\n");
  CHECK_THROWS_AS(read_weight_csv(neg, s), std::invalid_argument);
  std::istringstream outside("x1,mass\n1.5,1\n");
  CHECK_THROWS_AS(read_weight_csv(outside, s), std::runtime_error);
  std::istringstream header("x,y,mass\n");
  CHECK_THROWS_AS(read_weight_csv(header, s), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_weight_csv(empty, s), std::runtime_error);
}
