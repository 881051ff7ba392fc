#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "gw/dyadic.hpp"
#include "gw/kernels.hpp"

using namespace gw;

namespace {

constexpr double kPi = std::numbers::pi;

// ∫ P_t over R^n by x = t tan θ (radially for n = 2), midpoint rule.
double poisson_mass(double t, int dim) {
  const int m = 20000;
  const double h = 0.5 * kPi / m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double th = (i + 0.5) * h;
    const double r = t * std::tan(th);
    const double jac = t / (std::cos(th) * std::cos(th));
    if (dim == 1) {
      s += 2.0 * poisson({r, 0.0}, t, 1) * jac * h;
    } else {
      s += 2.0 * kPi * r * poisson({r, 0.0}, t, 2) * jac * h;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("normalization constants") {
  CHECK(poisson_normalization(1) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(poisson_normalization(2) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
  CHECK(poisson({0.0, 0.0}, 2.0, 1) == doctest::Approx(1.0 / (2.0 * kPi)));
  CHECK(poisson({3.0, 4.0}, 1.0, 2) == doctest::Approx(1.0 / (2.0 * kPi) / std::pow(26.0, 1.5)));
}

TEST_CASE("Poisson kernel has unit mass") {
  for (int dim : {1, 2}) {
    for (double t : {0.1, 1.0, 7.0}) CHECK(poisson_mass(t, dim) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("derivatives match finite differences") {
  const double h = 1e-5;
  for (int dim : {1, 2}) {
    for (const Point x : {Point{0.3, -0.7}, Point{-2.0, 0.1}, Point{0.0, 0.0}}) {
      for (double t : {0.2, 1.0, 3.0}) {
        const auto g = grad_poisson(x, t, dim);
        const double dt = (poisson(x, t + h, dim) - poisson(x, t - h, dim)) / (2 * h);
        CHECK(g[0] == doctest::Approx(dt).epsilon(1e-6));
        CHECK(dt_poisson(x, t, dim) == doctest::Approx(g[0]).epsilon(1e-13));
        for (int a = 0; a < dim; ++a) {
          Point xp = x, xm = x;
          xp[a] += h;
          xm[a] -= h;
          const double dx = (poisson(xp, t, dim) - poisson(xm, t, dim)) / (2 * h);
          CHECK(g[static_cast<std::size_t>(a + 1)] == doctest::Approx(dx).epsilon(1e-6).scale(1e-8));
        }
        if (dim == 1) CHECK(g[2] == 0.0);
      }
    }
  }
}

TEST_CASE("psi_t is t times the Poisson gradient") {
  for (int dim : {1, 2}) {
    for (int gen = 0; gen <= dim; ++gen) {
      for (double t : {0.05, 0.5, 4.0}) {
        const Point y{0.4, -0.25};
        const double want = t * grad_poisson(y, t, dim)[static_cast<std::size_t>(gen)];
        CHECK(psi_t(gen, y, t, dim) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(psi(2, {0.0, 0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(poisson({0.0, 0.0}, 0.0, 1), std::domain_error);
}

TEST_CASE("generators satisfy the decay, smoothness and cancellation conditions") {
  for (int dim : {1, 2}) {
    for (int gen = 0; gen <= dim; ++gen) {
      const auto u = u11_check(gen, dim);
      CHECK(u.c_decay > 0.0);
      CHECK(u.c_decay < 10.0);
      CHECK(u.c_smooth < 100.0);
      CHECK(u.cancel_residual < 1e-6);
    }
  }
}

TEST_CASE("convolution of a single atom") {
  const auto s = LatticeSpec::make(1, 3);
  std::vector<double> m(8, 0.0);
  m[5] = 2.0;
  const Weight w(s, m);
  const Point x{0.1, 0.0};
  const double y = s.cell_center(5)[0];
  for (double t : {0.01, 0.3}) {
    CHECK(psi_t_convolve(w, 1, x, t) == doctest::Approx(2.0 * psi_t(1, {x[0] - y, 0.0}, t, 1)));
  }
}

TEST_CASE("Poisson average of an atom inside the cube") {
  const auto s = LatticeSpec::make(2, 4, 2.0);
  const auto grid = DyadicGrid::standard(s, 2);
  const auto k = grid.cube(2, {1, 2});
  std::vector<double> m(s.cell_count(), 0.0);
  const auto inside = k.cells(s).front();
  m[inside] = 3.0;
  const double lk = 0.5;
  CHECK(poisson_avg(k, Weight(s, m)) == doctest::Approx(3.0 / (lk * lk)));
  // An atom at distance d contributes l / (l + d)^{n+1}.
  std::vector<double> far(s.cell_count(), 0.0);
  const std::size_t c = s.flat_index({15, 15});
  far[c] = 1.0;
  const double d = k.distance_to(s, s.cell_center(c));
  CHECK(poisson_avg(k, Weight(s, far)) == doctest::Approx(lk / std::pow(lk + d, 3)));
}

TEST_CASE("averaging operator uses half-open windows") {
  const auto s = LatticeSpec::make(1, 3);
  const Weight sigma(s, {1, 1, 1, 1, 1, 1, 1, 1});
  const GridFunction f(s, {1, 2, 3, 4, 5, 6, 7, 8});
  // Centers at 1/16, 3/16, ...; window [x - r/2, x + r/2).
  const double r = 0.25;
  CHECK(avg_operator(f, sigma, r, {0.1875, 0.0}) == doctest::Approx((1 + 2) / r));
  CHECK(avg_operator(f, sigma, r, {0.25, 0.0}) == doctest::Approx((2 + 3) / r));
  CHECK(avg_operator(f, sigma, 0.125, {0.0625, 0.0}) == doctest::Approx(8.0));
  CHECK_THROWS_AS(avg_operator(f, sigma, 0.0, {0.0, 0.0}), std::domain_error);
}

TEST_CASE("positive kernel K_alpha") {
  CHECK(k_alpha({0.0, 0.0}, {3.0, 0.0}, 1.0, 1.0, 1) == doctest::Approx(1.0 / 16.0));
  CHECK(k_alpha({0.0, 0.0}, {3.0, 4.0}, 0.5, 4.0, 2) == doctest::Approx(2.0 / std::pow(9.0, 2.5)));
  const auto s = LatticeSpec::make(1, 2);
  const Weight sigma(s, {0, 2, 0, 1});
  const GridFunction f(s, {9, 1, 9, -1});
  const Point x{0.0, 0.0};
  const double want = 2.0 * k_alpha(x, s.cell_center(1), 1.0, 0.5, 1) - k_alpha(x, s.cell_center(3), 1.0, 0.5, 1);
  CHECK(i_alpha(f, sigma, 1.0, 0.5, x) == doctest::Approx(want));
  CHECK_THROWS_AS(i_alpha(f, sigma, 0.0, 0.5, x), std::domain_error);
}
