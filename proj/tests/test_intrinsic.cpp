#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "gw/constants.hpp"
#include "gw/intrinsic.hpp"
#include "gw/kernels.hpp"

using namespace gw;

namespace {

Weight random_weight(const LatticeSpec& s, std::mt19937_64& rng, double zero_fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(s.cell_count());
  for (auto& v : m) v = u(rng) < zero_fraction ? 0.0 : u(rng);
  return Weight(s, m);
}

}  // namespace

TEST_CASE("default family layout") {
  CHECK(default_family(1).size() == 6 + 2);
  CHECK(default_family(2).size() == 12 + 3);
  CHECK(default_family(2, 0.5, false).size() == 12);
  CHECK_THROWS_AS(default_family(3), std::invalid_argument);
  CHECK_THROWS_AS(default_family(1, 1.5), std::invalid_argument);
}

TEST_CASE("members are odd bumps of Hoelder norm at most one") {
  for (int dim : {1, 2}) {
    for (double alpha : {1.0, 0.5}) {
      const auto fam = default_family(dim, alpha);
      for (const auto& m : fam.members) {
        const auto chk = check_member(m, alpha, dim);
        CHECK(chk.holder_quotient <= 1.0);
        if (m.extension()) {
          CHECK(std::isinf(chk.support_radius));
          CHECK(chk.mean < 1e-6);
          continue;
        }
        CHECK(chk.support_radius <= 1.0);
        CHECK(chk.mean < 1e-9);
        // Odd in the chosen axis.
        const Point x{0.2, -0.1};
        const int axis = (m.orientation / 2) % 2;
        Point y = x;
        y[static_cast<std::size_t>(axis)] = -y[static_cast<std::size_t>(axis)];
        CHECK(m(x, dim) == doctest::Approx(-m(y, dim)));
      }
    }
  }
}

TEST_CASE("generator normalization bounds slope and oscillation") {
  for (int dim : {1, 2}) {
    for (int g = 0; g <= dim; ++g) {
      const double c = generator_normalization(g, dim);
      CHECK(c > 0.0);
      // c sup|ψ| <= 1/2, sampled at the origin.
      CHECK(c * std::fabs(psi(g, {0.0, 0.0}, dim)) <= 0.5);
      const auto fam = generator_family(g, dim);
      CHECK(fam.size() == 1);
      CHECK(fam.members.front().scale == c);
    }
  }
}

TEST_CASE("A_alpha of single atoms") {
  TestFamily fam;
  fam.dim = 1;
  FamilyMember b;
  b.width = 1.0;
  fam.members.push_back(b);
  SignedAtoms mu;
  CHECK(a_alpha(mu, fam, {0.0, 0.0}, 1.0) == 0.0);
  mu.positions.push_back({0.25, 0.0});
  mu.masses.push_back(-2.0);
  const double t = 0.5;
  const Point y{0.5, 0.0};
  const double u = (0.5 - 0.25) / t;
  CHECK(a_alpha(mu, fam, y, t) == doctest::Approx(2.0 * u * (1.0 - u) / t));
  const double one = a_alpha(mu, fam, y, t);
  fam.members.push_back(default_family(1).members[3]);
  CHECK(a_alpha(mu, fam, y, t) >= one);
  CHECK_THROWS_AS(a_alpha(mu, fam, y, 0.0), std::domain_error);
  CHECK_THROWS_AS(a_alpha(mu, TestFamily{}, y, t), std::domain_error);
}

TEST_CASE("A_alpha is scale covariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int dim : {1, 2}) {
    const auto fam = default_family(dim);
    SignedAtoms mu, mu2;
    for (int k = 0; k < 6; ++k) {
      const Point p{u(rng), dim == 2 ? u(rng) : 0.0};
      mu.positions.push_back(p);
      mu2.positions.push_back({2 * p[0], 2 * p[1]});
      const double m = u(rng);
      mu.masses.push_back(m);
      mu2.masses.push_back(m);
    }
    for (int k = 0; k < 10; ++k) {
      const Point y{u(rng), dim == 2 ? u(rng) : 0.0};
      const double t = 0.1 + std::fabs(u(rng));
      const double a = a_alpha(mu, fam, y, t);
      CHECK(a_alpha(mu2, fam, {2 * y[0], 2 * y[1]}, 2 * t) == doctest::Approx(std::pow(2.0, -dim) * a).epsilon(1e-10));
    }
  }
}

TEST_CASE("singleton generator family reduces to the generator square function") {
  std::mt19937_64 rng(5);
  for (int dim : {1, 2}) {
    const auto s = LatticeSpec::make(dim, dim == 1 ? 5 : 3);
    const auto q = Quadrature::for_lattice(s, 6);
    const auto grid = DyadicGrid::standard(s, 2);
    const auto sigma = random_weight(s, rng, 0.3);
    const auto w = random_weight(s, rng, 0.3);
    GridFunction f(s);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t c = 0; c < s.cell_count(); ++c) f[c] = u(rng);
    for (int g = 0; g <= dim; ++g) {
      const auto fam = generator_family(g, dim);
      const double c = fam.members.front().scale;
      const auto tr = Transform::generator_only(g);
      CHECK(g_alpha_norm(f, sigma, w, fam, q) == doctest::Approx(c * g_norm(f, sigma, w, q, tr)).epsilon(1e-10));
      CHECK(intrinsic_testing_constant(sigma, w, fam, grid, q) ==
            doctest::Approx(c * testing_constant(sigma, w, grid, q, tr)).epsilon(1e-6));
    }
    CHECK(g_alpha_norm(f, Weight::zero(s), w, default_family(dim), q) == 0.0);
    CHECK_THROWS_AS(g_alpha_norm(f, sigma, w, TestFamily{}, q), std::domain_error);
    CHECK_THROWS_AS(intrinsic_testing_constant(sigma, w, TestFamily{}, grid, q), std::domain_error);
    CHECK_THROWS_AS(intrinsic_testing_constant(sigma, w, default_family(3 - dim), grid, q), std::invalid_argument);
  }
}

TEST_CASE("family JSON round trip") {
  const auto fam = default_family(2, 0.75);
  const auto text = family_to_json(fam);
  CHECK(text.find("\"extension\": true") != std::string::npos);
  const auto back = family_from_json(text);
  CHECK(back.alpha == fam.alpha);
  CHECK(back.dim == 2);
  REQUIRE(back.size() == fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    CHECK(back.members[i].kind == fam.members[i].kind);
    CHECK(back.members[i].width == fam.members[i].width);
    CHECK(back.members[i].orientation == fam.members[i].orientation);
    CHECK(back.members[i].generator == fam.members[i].generator);
    CHECK(back.members[i].scale == fam.members[i].scale);
  }
  const auto gen = family_from_json(R"({"dim": 1, "members": [{"kind": "generator", "generator": 1}]})");
  CHECK(gen.members.front().scale == generator_normalization(1, 1));
  CHECK_THROWS_AS(family_from_json(R"({"members": [{"kind": "spline"}]})"), std::invalid_argument);
  CHECK_THROWS_AS(family_from_json(R"({"members": [{"kind": "bump", "width": 2}]})"), std::invalid_argument);
  CHECK_THROWS_AS(family_from_json(R"({"members": [{"kind": "bump", "orientation": 2}]})"), std::invalid_argument);
  CHECK_THROWS_AS(family_from_json(R"({"dim": 3, "members": []})"), std::invalid_argument);
}
