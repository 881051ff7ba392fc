// Estimators for the two-weight constants and numerical checkers for the
// auxiliary lemmas. Every "≲" statement is measured as a ratio; nothing here
// asserts an absolute constant.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gw/dyadic.hpp"
#include "gw/gfun.hpp"
#include "gw/lattice.hpp"
#include "gw/quadrature.hpp"

namespace gw {

/// Masses of every cube of a grid, indexed [level][level_slot].
std::vector<std::vector<double>> level_masses(const Weight& w, const DyadicGrid& grid);

/// sup of (σ(I)/|I|)(w(I)/|I|) over every cube I ⊂ Q0 made of whole cells,
/// at any position. Only the lattice of the grid is used.
double a2_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid);

/// A maximizing cube for a2_constant: lower cell corner and side in cells.
struct A2Witness {
  double value = 0.0;
  CellIndex lo{0, 0};
  std::int64_t cells = 0;
};
A2Witness a2_witness(const Weight& sigma, const Weight& w, const DyadicGrid& grid);

/// sup over σ-charged cubes of sqrt(box_integral / σ(I)).
double testing_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const Quadrature& quad,
                        const Transform& tr = Transform::gradient());

struct PivotalOptions {
  enum class Strategy { Exact, Enumerate, Greedy, Sampled };
  Strategy strategy = Strategy::Exact;
  int samples = 10000;
  std::uint64_t seed = 1;
  std::uint64_t enumeration_budget = 1000000;
};

std::string to_string(PivotalOptions::Strategy s);

struct PivotalResult {
  double value = 0.0;
  std::string strategy;
};

/// sup over I0 and dyadic partitions {I_α} of I0 of
/// (Σ_α Σ_{K ∈ 𝒲_{I_α}} P(K, 1_{I0} σ)² w(K) / σ(I0))^{1/2}.
/// Exact is a tree dynamic program; Enumerate lists every partition and
/// throws std::length_error past the budget; Greedy and Sampled are lower
/// bounds.
PivotalResult pivotal_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid,
                               const PivotalOptions& options = {});

/// Σ_α Σ_{K ∈ 𝒲_{I_α}} P(K, 1_{I0} σ)² w(K) for one explicit partition.
double pivotal_partition_sum(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const DyadicCube& i0,
                             const std::vector<DyadicCube>& partition);

/// sup_Q Σ_y l(Q)² / (l(Q) + dist(y, Q))^{2(n+1)} σ(y) · w(Q).
double half_poisson_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid);

using CubeCoefficients = std::vector<std::pair<DyadicCube, double>>;

/// A^α_{QR} = l(Q)^{α/2} l(R)^{α/2} D(Q,R)^{-(n+α)} σ(Q)^{1/2} w(R)^{1/2}.
double bilinear_coefficient(const DyadicCube& q, const DyadicCube& r, double alpha, const Weight& sigma,
                            const Weight& w);
double bilinear_form(double alpha, const CubeCoefficients& x, const CubeCoefficients& y, const Weight& sigma,
                     const Weight& w);
/// Σ A x y / (𝒜₂^{1/2} ‖x‖ ‖y‖), 0/0 → 0.
double bilinear_form_ratio(const DyadicGrid& grid, double alpha, const CubeCoefficients& x,
                           const CubeCoefficients& y, const Weight& sigma, const Weight& w);

/// sup over coefficient vectors of bilinear_form_ratio, i.e. the top
/// singular value of A^α over all cubes, divided by 𝒜₂^{1/2}.
double bilinear_norm_ratio(const DyadicGrid& grid, double alpha, const Weight& sigma, const Weight& w);

/// Whitney-region integral of ψ_t * (fσ) over W_R divided by
/// (l(R)/l(K)) P(K, |f|σ)² w(R). Requires R ⊂ K ⊂ S,
/// dist(R, ∂K) ≥ l(R)^γ l(K)^{1-γ} and fσ = 0 on S (std::domain_error).
double good_gain_ratio(const DyadicGrid& grid, const DyadicCube& r, const DyadicCube& k, const DyadicCube& s,
                       const GridFunction& f, const Weight& sigma, const Weight& w, const Transform& tr,
                       const Quadrature& quad);

/// ‖A_r^σ f‖_{L²(w)} / (𝒜₂^{1/2} ‖f‖_σ), 0/0 → 0.
double averaging_ratio(const GridFunction& f, const Weight& sigma, const Weight& w, double r_scale,
                       const DyadicGrid& grid);

/// sup over f of averaging_ratio: ‖A_r^σ‖_{L²(σ)→L²(w)} / 𝒜₂^{1/2}.
double averaging_norm_ratio(const Weight& sigma, const Weight& w, double r_scale, const DyadicGrid& grid);

/// max of (σ(Q)/|Q|)² w(Q) / ‖g(1_Q σ)‖²_{L²(w)} over the dyadic cubes and
/// the cube attaining 𝒜₂.
double necessity_a2_ratio(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const Quadrature& quad);

struct ConstantsReport {
  double a2 = 0.0;
  double testing = 0.0;
  PivotalResult pivotal;
  double n_const = 0.0;  // 𝒜₂^{1/2} + 𝒯
  double g = 0.0;        // 𝒢(t_min, t_max)
  double g_half_tmin = 0.0;
  double half_poisson = 0.0;
  LatticeSpec spec;
  int r = 0;
  double gamma = 0.0;
  int nodes_per_octave = 0;
  bool g_exact = true;
};

struct ConstantsOptions {
  int nodes_per_octave = 16;
  PivotalOptions pivotal;
  bool check_t_min_stability = true;
};

ConstantsReport compute_constants(const Weight& sigma, const Weight& w, const DyadicGrid& grid,
                                  const ConstantsOptions& options = {});

/// 𝒫 / 𝒩 from a computed report, 0/0 → 0.
double pivotal_lemma_ratio(const ConstantsReport& report);
double pivotal_lemma_ratio(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const Quadrature& quad,
                           const PivotalOptions& options = {});

}  // namespace gw
