#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gw/lattice.hpp"
#include "gw/quadrature.hpp"

using namespace gw;

TEST_CASE("Gauss-Legendre integrates polynomials up to degree 2n-1") {
  for (int n : {1, 3, 8, 16}) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], deg);
      const double want = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
      CHECK(s == doctest::Approx(want).epsilon(1e-13).scale(1.0));
    }
  }
  std::vector<double> x, w;
  CHECK_THROWS_AS(gauss_legendre(0, x, w), std::invalid_argument);
}

TEST_CASE("dt/t weights sum to the log ratio") {
  for (auto [a, b] : {std::pair{0.01, 4.0}, std::pair{0.3, 0.31}, std::pair{1.0 / 256, 1.0}}) {
    const Quadrature q(a, b, 8, 1.0);
    double s = 0.0;
    for (double v : q.weights()) s += v;
    CHECK(s == doctest::Approx(std::log(b / a)).epsilon(1e-13));
    for (double t : q.nodes()) CHECK((t > a && t < b));
  }
}

TEST_CASE("t dt integrals through the t-squared weight") {
  const Quadrature q(0.05, 3.0, 6, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights()[i] * q.nodes()[i] * q.nodes()[i];
  CHECK(s == doctest::Approx((9.0 - 0.0025) / 2).epsilon(1e-12));
  // ∫ e^{-t} dt/t on [1, 2] by a fine Simpson rule.
  double ref = 0.0;
  const int m = 20000;
  for (int i = 0; i <= m; ++i) {
    const double t = 1.0 + static_cast<double>(i) / m;
    const double c = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
    ref += c * std::exp(-t) / t;
  }
  ref /= 3.0 * m;
  const Quadrature r(1.0, 2.0, 16, 1.0);
  double got = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) got += r.weights()[i] * std::exp(-r.nodes()[i]);
  CHECK(got == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("panels align with octaves of the anchor") {
  const auto s = LatticeSpec::make(1, 6, 2.0);
  const auto q = Quadrature::for_lattice(s, 5);
  CHECK(q.t_min() == s.t_min);
  CHECK(q.t_max() == s.t_max);
  for (int k = -6; k < 2; ++k) {
    const double lo = 2.0 * std::exp2(k);
    CHECK(q.weight_sum(lo, 2 * lo) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
  }
  CHECK(q.size() % 5 == 0);
}

TEST_CASE("invalid quadrature ranges") {
  CHECK_THROWS_AS(Quadrature(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Quadrature(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Quadrature(0.1, 1.0, 0), std::invalid_argument);
}
