#include "gw/stopping.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>

#include "gw/kernels.hpp"
#include "gw/transform.hpp"

namespace gw {

std::string to_string(Trigger t) {
  switch (t) {
    case Trigger::Root: return "root";
    case Trigger::Energy: return "energy";
    case Trigger::Pivotal: return "pivotal";
  }
  return "unknown";
}

int StoppingTree::add_node(StoppingNode node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int StoppingTree::add_child(int parent, StoppingNode node) {
  node.parent = parent;
  const int idx = add_node(std::move(node));
  nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);
  return idx;
}

int StoppingTree::stopping_parent(const DyadicGrid& grid, const DyadicCube& i) const {
  int current = -1;
  for (int r : roots_) {
    if (grid.contains(nodes_[static_cast<std::size_t>(r)].cube, i)) {
      current = r;
      break;
    }
  }
  if (current < 0) throw std::domain_error("cube lies in no stopping root");
  for (;;) {
    int next = -1;
    for (int c : nodes_[static_cast<std::size_t>(current)].children) {
      if (grid.contains(nodes_[static_cast<std::size_t>(c)].cube, i)) {
        next = c;
        break;
      }
    }
    if (next < 0) return current;
    current = next;
  }
}

int StoppingTree::ancestor(int node, int k) const {
  int cur = node;
  for (int i = 0; i < k && cur >= 0; ++i) cur = nodes_[static_cast<std::size_t>(cur)].parent;
  return cur;
}

StoppingTree build_tree(const GridFunction& f, const Weight& sigma, const Weight& w, const DyadicGrid& grid,
                        const DyadicCube& q0, const StoppingParams& params) {
  StoppingTree tree(q0, grid.r(), params);
  if (mass(sigma, q0) == 0.0 || q0.level() >= grid.depth()) return tree;
  const GridFunction abs_f = f.abs();
  const auto& spec = sigma.spec();
  WhitneyCache whitney(grid);

  std::deque<int> pending;
  for (const DyadicCube& c : grid.children(q0)) {
    StoppingNode node;
    node.cube = c;
    node.tau = expectation(abs_f, sigma, c);
    const int idx = tree.add_node(node);
    tree.add_root(idx);
    pending.push_back(idx);
  }

  const double pivotal_threshold = params.c0 * params.pivotal * params.pivotal;
  while (!pending.empty()) {
    const int s_idx = pending.front();
    pending.pop_front();
    const DyadicCube s_cube = tree.nodes()[static_cast<std::size_t>(s_idx)].cube;
    const double tau_s = tree.nodes()[static_cast<std::size_t>(s_idx)].tau;
    if (mass(sigma, s_cube) == 0.0) continue;
    const SignedAtoms sigma_s = atoms_of(sigma.restricted(s_cube));
    const int min_level = s_cube.level() + grid.r() + 1;

    std::vector<StoppingNode> found;
    std::function<void(const DyadicCube&)> visit = [&](const DyadicCube& k) {
      if (k.level() >= min_level) {
        const double sk = mass(sigma, k);
        if (sk == 0.0) return;
        const double avg = integrate(abs_f, sigma, k) / sk;
        Trigger trig = Trigger::Root;
        if (avg > params.energy_multiplier * tau_s) {
          trig = Trigger::Energy;
        } else {
          double sum = 0.0;
          for (const auto& m : whitney.get(k).members) {
            const double p = poisson_avg(m.cube, sigma_s, spec);
            sum += p * p * mass(w, m.cube);
          }
          if (sum > 0.0 && sum >= pivotal_threshold * sk) trig = Trigger::Pivotal;
        }
        if (trig != Trigger::Root) {
          StoppingNode node;
          node.cube = k;
          node.trigger = trig;
          node.parent = s_idx;
          node.tau = avg > params.tau_multiplier * tau_s ? avg : tau_s;
          found.push_back(node);
          return;
        }
      }
      if (k.level() < grid.depth()) {
        for (const DyadicCube& c : grid.children(k)) visit(c);
      }
    };
    visit(s_cube);
    for (auto& node : found) {
      pending.push_back(tree.add_child(s_idx, std::move(node)));
    }
  }
  return tree;
}

double quasi_orthogonality_ratio(const StoppingTree& tree, const GridFunction& f, const Weight& sigma) {
  const double nf = std::pow(l2_norm(f, sigma), 2);
  if (nf == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& node : tree.nodes()) s += node.tau * node.tau * mass(sigma, node.cube);
  return s / nf;
}

ControlReport control_by_tau(const StoppingTree& tree, const DyadicGrid& grid, const GridFunction& f,
                             const Weight& sigma) {
  ControlReport rep;
  if (tree.empty()) return rep;
  const DyadicCube& top = tree.top();
  for (int j = top.level() + 1; j <= grid.depth(); ++j) {
    for (const DyadicCube& i : grid.level_cubes(j)) {
      if (!grid.contains(top, i)) continue;
      const double e = std::fabs(expectation(f, sigma, i));
      const int s_idx = tree.stopping_parent(grid, i);
      const auto& s = tree.nodes()[static_cast<std::size_t>(s_idx)];
      double ratio = 0.0;
      if (s.tau > 0.0) {
        ratio = e / s.tau;
      } else if (e > 0.0) {
        ratio = std::numeric_limits<double>::infinity();
      }
      rep.all_max = std::max(rep.all_max, ratio);
      const bool eligible = (s.cube == i) || (i.level() >= s.cube.level() + tree.r() + 1);
      if (eligible) rep.eligible_max = std::max(rep.eligible_max, ratio);
    }
  }
  return rep;
}

double control_bound(const StoppingParams& params) {
  return std::max(params.energy_multiplier, params.tau_multiplier);
}

ConstructionCheck check_construction(const StoppingTree& tree, const DyadicGrid& grid) {
  ConstructionCheck chk;
  const auto& spec = grid.spec();
  for (const auto& node : tree.nodes()) {
    if (node.parent < 0) continue;
    ++chk.edges;
    const auto& parent = tree.nodes()[static_cast<std::size_t>(node.parent)];
    if (node.cube.side(spec) > std::exp2(-(grid.r() + 1)) * parent.cube.side(spec)) ++chk.gap_violations;
    const DyadicCube up = grid.parent(node.cube, 1);
    if (grid.is_good(up) && grid.strongly_contained(up, parent.cube)) {
      ++chk.hypotheses;
      for (const auto& m : grid.whitney(parent.cube).members) {
        if (grid.contains(m.cube, up)) {
          ++chk.captured;
          break;
        }
      }
    }
  }
  return chk;
}

}  // namespace gw
