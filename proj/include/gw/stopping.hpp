// Stopping cubes with stopping values τ, and the diagnostics that go with
// them.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"

namespace gw {

struct StoppingParams {
  double energy_multiplier = 10.0;  // rule (1): E_I|f| > 10 τ(S)
  double tau_multiplier = 2.0;      // τ update: E|f| > 2 τ(S)
  double c0 = 4.0;                  // rule (2) multiplier
  double pivotal = 0.0;             // 𝒫, supplied by the caller
};

enum class Trigger { Root, Energy, Pivotal };
std::string to_string(Trigger t);

struct StoppingNode {
  DyadicCube cube;
  double tau = 0.0;
  Trigger trigger = Trigger::Root;
  int parent = -1;
  std::vector<int> children;
};

class StoppingTree {
 public:
  StoppingTree(DyadicCube top, int r, StoppingParams params) : top_(top), r_(r), params_(params) {}

  const DyadicCube& top() const { return top_; }
  int r() const { return r_; }
  const StoppingParams& params() const { return params_; }
  const std::vector<StoppingNode>& nodes() const { return nodes_; }
  const std::vector<int>& roots() const { return roots_; }
  bool empty() const { return nodes_.empty(); }

  /// Index of S(I): the minimal stopping cube containing I. Throws
  /// std::domain_error when I lies in no root.
  int stopping_parent(const DyadicGrid& grid, const DyadicCube& i) const;
  /// ℱ^k(S) as a node index, or -1 past the roots.
  int ancestor(int node, int k) const;

  int add_node(StoppingNode node);
  int add_child(int parent, StoppingNode node);
  void add_root(int index) { roots_.push_back(index); }

 private:
  DyadicCube top_;
  int r_;
  StoppingParams params_;
  std::vector<StoppingNode> nodes_;
  std::vector<int> roots_;
};

/// Roots are the children of q0. Children of S are the maximal cubes I ⊂ S
/// with level(I) ≥ level(S) + r + 1 meeting rule (1) or (2); σ-null cubes
/// never stop.
StoppingTree build_tree(const GridFunction& f, const Weight& sigma, const Weight& w, const DyadicGrid& grid,
                        const DyadicCube& q0, const StoppingParams& params);

/// Σ_S τ(S)² σ(S) / ‖f‖²_σ, 0 when f = 0.
double quasi_orthogonality_ratio(const StoppingTree& tree, const GridFunction& f, const Weight& sigma);

struct ControlReport {
  double eligible_max = 0.0;  // over I = S(I) or level(I) ≥ level(S(I)) + r + 1
  double all_max = 0.0;       // over every cube strictly inside the top cube
};

/// max |E_I f| / τ(S(I)).
ControlReport control_by_tau(const StoppingTree& tree, const DyadicGrid& grid, const GridFunction& f,
                             const Weight& sigma);

/// Bound on ControlReport::eligible_max forced by the stopping rules.
double control_bound(const StoppingParams& params);

struct ConstructionCheck {
  int edges = 0;
  int gap_violations = 0;
  int hypotheses = 0;  // edges whose parent cube Ṡ^{(1)} is good and strongly inside S
  int captured = 0;    // of those, Ṡ^{(1)} lies in some K ∈ 𝒲_S
};

ConstructionCheck check_construction(const StoppingTree& tree, const DyadicGrid& grid);

}  // namespace gw
