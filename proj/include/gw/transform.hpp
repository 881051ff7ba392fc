// Martingale averages and differences with respect to a weight.
#pragma once

#include <vector>

#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"

namespace gw {

/// E_Q^σ f, or 0 when σ(Q) = 0.
double expectation(const GridFunction& f, const Weight& sigma, const DyadicCube& q);

/// Δ_Q^σ f = Σ_{Q' ∈ ch(Q)} (E_{Q'}^σ f − E_Q^σ f) 1_{Q'}, zero off Q.
/// Throws std::domain_error at the bottom level.
GridFunction delta(const GridFunction& f, const Weight& sigma, const DyadicGrid& grid, const DyadicCube& q);

/// A difference Δ_Q^σ f stored by its constant value on each child.
struct MartingaleDifference {
  DyadicCube cube;
  std::vector<DyadicCube> children;
  std::vector<double> values;

  GridFunction materialize(const LatticeSpec& spec) const;
  double norm_squared(const Weight& sigma) const;
};

struct MartingaleExpansion {
  int top_level = 0;
  std::vector<DyadicCube> tops;
  std::vector<double> top_coefficients;
  std::vector<MartingaleDifference> differences;
  /// Max |f − reconstruction| over σ-charged cells.
  double residual = 0.0;

  GridFunction reconstruct(const LatticeSpec& spec) const;
  /// |‖f‖² − Σ‖Δ‖² − Σ‖E 1_Q‖²| / ‖f‖² (0 when f vanishes σ-a.e.).
  double pythagoras_residual(const GridFunction& f, const Weight& sigma) const;
};

/// f = Σ_{level ≥ s} Δ_Q f + Σ_{level = s} (E_Q f) 1_Q on σ-charged cells.
MartingaleExpansion expand(const GridFunction& f, const Weight& sigma, const DyadicGrid& grid, int top_level);

/// ⟨g, h⟩_σ.
double inner_product(const GridFunction& g, const GridFunction& h, const Weight& sigma);

}  // namespace gw
