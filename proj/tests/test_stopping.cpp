#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "gw/kernels.hpp"
#include "gw/stopping.hpp"
#include "gw/transform.hpp"

using namespace gw;

namespace {

struct Case {
  LatticeSpec spec;
  Weight sigma;
  Weight w;
  GridFunction f;
};

Case random_case(int dim, int depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto s = LatticeSpec::make(dim, depth);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(s.cell_count()), b(s.cell_count()), f(s.cell_count());
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    a[c] = u(rng) < 0.3 ? 0.0 : std::pow(u(rng), 4);
    b[c] = u(rng);
    f[c] = (u(rng) < 0.1 ? 20.0 : 1.0) * (2.0 * u(rng) - 1.0);
  }
  return {s, Weight(s, a), Weight(s, b), GridFunction(s, f)};
}

// Minimal stopping cube containing i, by scanning every node.
int minimal_container(const StoppingTree& tree, const DyadicGrid& grid, const DyadicCube& i) {
  int best = -1;
  for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
    const auto& n = tree.nodes()[k];
    if (!grid.contains(n.cube, i)) continue;
    if (best < 0 || n.cube.level() > tree.nodes()[static_cast<std::size_t>(best)].cube.level()) best = static_cast<int>(k);
  }
  return best;
}

}  // namespace

TEST_CASE("default control bound") {
  CHECK(control_bound(StoppingParams{}) == 10.0);
  StoppingParams p;
  p.energy_multiplier = 1.5;
  CHECK(control_bound(p) == 2.0);
}

TEST_CASE("stopping tree invariants") {
  int edges = 0;
  for (int dim : {1, 2}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto c = random_case(dim, dim == 1 ? 8 : 5, seed);
      std::mt19937_64 rng(seed);
      const auto grid = DyadicGrid::random(c.spec, 2, DyadicGrid::default_gamma(dim), rng);
      StoppingParams params;
      params.pivotal = 0.5;
      const auto tree = build_tree(c.f, c.sigma, c.w, grid, grid.top(), params);
      REQUIRE(tree.roots().size() == grid.level_size(1));
      const auto abs_f = c.f.abs();
      for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
        const auto& n = tree.nodes()[k];
        if (n.parent < 0) {
          CHECK(n.trigger == Trigger::Root);
          CHECK(n.tau == doctest::Approx(expectation(abs_f, c.sigma, n.cube)));
          continue;
        }
        const auto& p = tree.nodes()[static_cast<std::size_t>(n.parent)];
        CHECK(grid.contains(p.cube, n.cube));
        CHECK(n.cube.level() >= p.cube.level() + grid.r() + 1);
        CHECK(n.tau >= p.tau);
        CHECK(mass(c.sigma, n.cube) > 0.0);
        const double avg = expectation(abs_f, c.sigma, n.cube);
        if (n.trigger == Trigger::Energy) CHECK(avg > params.energy_multiplier * p.tau);
        CHECK(n.tau == doctest::Approx(avg > 2.0 * p.tau ? avg : p.tau));
        // Siblings are disjoint.
        for (int other : p.children) {
          if (other == static_cast<int>(k)) continue;
          const auto& o = tree.nodes()[static_cast<std::size_t>(other)];
          CHECK_FALSE(grid.contains(o.cube, n.cube));
          CHECK_FALSE(grid.contains(n.cube, o.cube));
        }
      }
      const auto chk = check_construction(tree, grid);
      edges += chk.edges;
      CHECK(chk.gap_violations == 0);
      CHECK(chk.captured <= chk.hypotheses);
      const auto ctl = control_by_tau(tree, grid, c.f, c.sigma);
      CHECK(ctl.eligible_max <= control_bound(params));
      CHECK(ctl.eligible_max <= ctl.all_max);
    }
  }
  CHECK(edges > 0);
}

TEST_CASE("energy stops are maximal") {
  const auto c = random_case(1, 8, 11);
  const auto grid = DyadicGrid::standard(c.spec, 2, 0.25);
  StoppingParams params;
  params.pivotal = 1e6;  // pivotal rule never fires
  const auto tree = build_tree(c.f, c.sigma, c.w, grid, grid.top(), params);
  const auto abs_f = c.f.abs();
  int stops = 0;
  for (const auto& n : tree.nodes()) {
    if (n.parent < 0) continue;
    CHECK(n.trigger == Trigger::Energy);
    ++stops;
    const auto& p = tree.nodes()[static_cast<std::size_t>(n.parent)];
    for (int up = 1; n.cube.level() - up >= p.cube.level() + grid.r() + 1; ++up) {
      const auto a = grid.parent(n.cube, up);
      CHECK_FALSE(expectation(abs_f, c.sigma, a) > params.energy_multiplier * p.tau);
    }
  }
  CHECK(stops > 0);
}

TEST_CASE("stopping parent is the minimal containing node") {
  const auto c = random_case(1, 7, 5);
  std::mt19937_64 rng(5);
  const auto grid = DyadicGrid::random(c.spec, 2, 0.25, rng);
  StoppingParams params;
  params.pivotal = 0.3;
  const auto tree = build_tree(c.f, c.sigma, c.w, grid, grid.top(), params);
  for (int l = 1; l <= c.spec.depth; ++l) {
    for (const auto& i : grid.level_cubes(l)) CHECK(tree.stopping_parent(grid, i) == minimal_container(tree, grid, i));
  }
  CHECK_THROWS_AS(tree.stopping_parent(grid, grid.top()), std::domain_error);
  for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
    CHECK(tree.ancestor(static_cast<int>(k), 0) == static_cast<int>(k));
    CHECK(tree.ancestor(static_cast<int>(k), 1) == tree.nodes()[k].parent);
  }
}

TEST_CASE("quasi-orthogonality sum") {
  const auto c = random_case(1, 6, 3);
  const auto grid = DyadicGrid::standard(c.spec, 2, 0.25);
  const auto tree = build_tree(c.f, c.sigma, c.w, grid, grid.top(), StoppingParams{});
  double sum = 0.0;
  for (const auto& n : tree.nodes()) sum += n.tau * n.tau * mass(c.sigma, n.cube);
  CHECK(quasi_orthogonality_ratio(tree, c.f, c.sigma) == doctest::Approx(sum / std::pow(l2_norm(c.f, c.sigma), 2)));
  CHECK(quasi_orthogonality_ratio(tree, GridFunction(c.spec), c.sigma) == 0.0);
}

TEST_CASE("sigma-null input gives an empty tree") {
  const auto s = LatticeSpec::make(1, 5);
  const auto grid = DyadicGrid::standard(s, 2);
  const auto tree = build_tree(GridFunction(s, 1.0), Weight::zero(s), Weight::lebesgue(s), grid, grid.top(), {});
  CHECK(tree.empty());
  const auto ctl = control_by_tau(tree, grid, GridFunction(s, 1.0), Weight::zero(s));
  CHECK(ctl.eligible_max == 0.0);
}
