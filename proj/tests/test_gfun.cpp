#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "gw/gfun.hpp"
#include "gw/kernels.hpp"

using namespace gw;

namespace {

Weight random_weight(const LatticeSpec& s, std::mt19937_64& rng, double zero_fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(s.cell_count());
  for (auto& v : m) v = u(rng) < zero_fraction ? 0.0 : u(rng);
  return Weight(s, m);
}

Weight single_atom(const LatticeSpec& s, std::size_t cell, double m) {
  std::vector<double> v(s.cell_count(), 0.0);
  v[cell] = m;
  return Weight(s, v);
}

// t² |∇P_t(x)|² straight from the gradient formula.
double gradient_energy(const Point& x, double t, int dim) {
  const auto g = grad_poisson(x, t, dim);
  return t * t * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
}

}  // namespace

TEST_CASE("transform components") {
  CHECK(Transform::gradient().components(2) == std::vector<int>{0, 1, 2});
  CHECK(Transform::generator_only(1).components(1) == std::vector<int>{1});
  CHECK_THROWS_AS(Transform::generator_only(2).components(1), std::invalid_argument);
}

TEST_CASE("field of one atom is the scaled gradient energy") {
  for (int dim : {1, 2}) {
    const auto s = LatticeSpec::make(dim, 3);
    SignedAtoms mu;
    mu.positions.push_back({0.3, 0.6});
    mu.masses.push_back(-1.5);
    for (double t : {0.02, 0.4, 3.0}) {
      const Point x{0.8, 0.1};
      const Point d{x[0] - 0.3, x[1] - 0.6};
      CHECK(field_squared(mu, Transform::gradient(), x, t, s) ==
            doctest::Approx(2.25 * gradient_energy(d, t, dim)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Whitney regions tile the strip") {
  std::mt19937_64 rng(2);
  for (int dim : {1, 2}) {
    const auto s = LatticeSpec::make(dim, dim == 1 ? 5 : 3);
    const auto q = Quadrature::for_lattice(s, 4);
    const auto w = random_weight(s, rng, 0.2);
    const auto sigma = random_weight(s, rng, 0.5);
    const auto mu = atoms_of(GridFunction(s, 1.0), sigma);
    const auto grid = DyadicGrid::standard(s, 2);
    double tiles = 0.0;
    for (const auto& r : grid.all_cubes()) tiles += whitney_integral(r, mu, Transform::gradient(), w, q);
    const auto [lo, hi] = whitney_t_range(s);
    CHECK(lo == doctest::Approx(s.side * std::exp2(-s.depth - 1)));
    CHECK(tiles == doctest::Approx(strip_integral(mu, Transform::gradient(), w, q, lo, hi)).epsilon(1e-12));
  }
}

TEST_CASE("box integral of a single atom") {
  const auto s = LatticeSpec::make(1, 5);
  const auto q = Quadrature::for_lattice(s, 8);
  const auto grid = DyadicGrid::standard(s, 2);
  const auto i = grid.cube(2, {1, 0});
  const std::size_t atom = i.cells(s)[3];
  const auto sigma = single_atom(s, atom, 2.0);
  const auto w = Weight::lebesgue(s);
  double want = 0.0;
  for (auto c : i.cells(s)) {
    const Point d{s.cell_center(c)[0] - s.cell_center(atom)[0], 0.0};
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double t = q.nodes()[k];
      if (t <= i.side(s)) want += w[c] * q.weights()[k] * 4.0 * gradient_energy(d, t, 1);
    }
  }
  CHECK(box_integral(i, sigma, w, q) == doctest::Approx(want).epsilon(1e-12));
  // Atoms outside I are not part of the argument σ 1_I.
  CHECK(box_integral(grid.cube(2, {0, 0}), sigma, w, q) == 0.0);
}

TEST_CASE("exact and power-iteration norms agree") {
  std::mt19937_64 rng(4);
  for (int dim : {1, 2}) {
    const auto s = LatticeSpec::make(dim, dim == 1 ? 5 : 3);
    const auto q = Quadrature::for_lattice(s, 6);
    const auto sigma = random_weight(s, rng, 0.3);
    const auto w = random_weight(s, rng, 0.3);
    for (const auto tr : {Transform::gradient(), Transform::generator_only(0)}) {
      const auto ex = operator_norm_exact(sigma, w, q, tr);
      CHECK(ex.norm > 0.0);
      CHECK(operator_norm_power(sigma, w, q, tr) == doctest::Approx(ex.norm).epsilon(1e-6));
      // The eigenvector is a maximizer.
      const double achieved = g_norm(ex.maximizer, sigma, w, q, tr) / l2_norm(ex.maximizer, sigma);
      CHECK(achieved == doctest::Approx(ex.norm).epsilon(1e-9));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int trial = 0; trial < 5; ++trial) {
        GridFunction f(s);
        for (std::size_t c = 0; c < s.cell_count(); ++c) f[c] = u(rng);
        CHECK(g_norm(f, sigma, w, q, tr) <= ex.norm * l2_norm(f, sigma) * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("norm scales like the square root of both weights") {
  std::mt19937_64 rng(9);
  const auto s = LatticeSpec::make(1, 5);
  const auto q = Quadrature::for_lattice(s, 6);
  const auto sigma = random_weight(s, rng, 0.0);
  const auto w = random_weight(s, rng, 0.0);
  const double base = operator_norm_exact(sigma, w, q).norm;
  CHECK(operator_norm_exact(sigma.scaled(4.0), w.scaled(9.0), q).norm == doctest::Approx(6.0 * base).epsilon(1e-10));
}

TEST_CASE("g_value overloads agree with the norm") {
  const auto s = LatticeSpec::make(1, 4);
  const auto q = Quadrature::for_lattice(s, 6);
  const auto sigma = single_atom(s, 5, 1.0);
  const auto w = single_atom(s, 11, 3.0);
  const double gv = g_value(sigma, s.cell_center(11), q);
  CHECK(g_norm(GridFunction(s, 1.0), sigma, w, q) == doctest::Approx(std::sqrt(3.0) * gv));
  CHECK(operator_norm_exact(sigma, w, q).norm == doctest::Approx(std::sqrt(3.0) * gv));
  CHECK(g_norm(GridFunction(s, 1.0), Weight::zero(s), w, q) == 0.0);
  CHECK(operator_norm_exact(sigma, Weight::zero(s), q).norm == 0.0);
}

TEST_CASE("operator matrix stream round trip") {
  std::mt19937_64 rng(1);
  const auto s = LatticeSpec::make(1, 4);
  const auto q = Quadrature::for_lattice(s, 4);
  const auto op = assemble_operator(random_weight(s, rng, 0.2), random_weight(s, rng, 0.2), q);
  std::stringstream buf;
  write_operator_matrix(buf, op);
  CHECK(buf.str().size() == 8 + 8 * op.matrix.size());
  const auto back = read_operator_matrix(buf);
  CHECK(back.matrix == op.matrix);
  std::istringstream cut(buf.str().substr(0, 20));
  CHECK_THROWS_AS(read_operator_matrix(cut), std::runtime_error);
  CHECK(op.matrix.isApprox(op.matrix.transpose(), 0.0));
}

TEST_CASE("dense eigensolve refuses large operators") {
  const auto s = LatticeSpec::make(2, 7);
  const auto q = Quadrature::for_lattice(s, 1);
  CHECK_THROWS_AS(operator_norm_exact(Weight::lebesgue(s), Weight::lebesgue(s), q), std::length_error);
}
