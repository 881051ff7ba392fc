// Discrete g-function: pointwise values, weighted norms, Carleson-box and
// Whitney-region integrals, and the exact operator norm via an eigensolve.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"
#include "gw/quadrature.hpp"

namespace gw {

/// Which square function: the full Poisson gradient (all n+1 generators,
/// giving the classical g) or a single ψ generator.
struct Transform {
  enum class Kind { PoissonGradient, PsiGenerator };
  Kind kind = Kind::PoissonGradient;
  int generator = 0;

  static Transform gradient() { return {}; }
  static Transform generator_only(int g) { return {Kind::PsiGenerator, g}; }
  std::vector<int> components(int dim) const;
  std::string name() const;
};

/// Σ_c |ψ^c_t * μ(x)|², i.e. t² |∇P_t μ(x)|² for the gradient transform.
double field_squared(const SignedAtoms& mu, const Transform& tr, const Point& x, double t, const LatticeSpec& spec);

/// (Σ_t q_t field²)^{1/2} over every quadrature node.
double g_value(const SignedAtoms& fw, const Point& x, const Quadrature& quad, const LatticeSpec& spec,
               const Transform& tr = Transform::gradient());
double g_value(const Weight& fw, const Point& x, const Quadrature& quad);

/// ‖g(fσ)‖_{L²(w)}.
double g_norm(const GridFunction& f, const Weight& sigma, const Weight& w, const Quadrature& quad,
              const Transform& tr = Transform::gradient());

/// Σ_{x ∈ cells} w(x) Σ_{lo < t ≤ hi} q_t field²(x, t).
double region_integral(const SignedAtoms& mu, const Transform& tr, const Weight& w,
                       const std::vector<std::size_t>& cells, const Quadrature& quad, double lo, double hi);

/// Carleson box integral over I × (0, l(I)] of the argument σ 1_I.
double box_integral(const DyadicCube& i, const Weight& sigma, const Weight& w, const Quadrature& quad,
                    const Transform& tr = Transform::gradient());

/// Integral over W_R = R × (l(R)/2, l(R)].
double whitney_integral(const DyadicCube& r, const SignedAtoms& fw, const Transform& tr, const Weight& w,
                        const Quadrature& quad);

/// Integral over Q0 × (lo, hi].
double strip_integral(const SignedAtoms& fw, const Transform& tr, const Weight& w, const Quadrature& quad,
                      double lo, double hi);

/// The t-range (s 2^{-d-1}, s] tiled by Whitney regions of levels 0..d.
std::pair<double, double> whitney_t_range(const LatticeSpec& spec);

/// Quadratic form f ↦ ‖T(fσ)‖²_{L²(w)} in the coordinates u = sqrt(σ) f over
/// σ-charged cells, so that 𝒢² is its top eigenvalue.
struct OperatorMatrix {
  Eigen::MatrixXd matrix;
  std::vector<std::size_t> cells;
};

inline constexpr std::size_t kMaxExactUnknowns = 4096;

OperatorMatrix assemble_operator(const Weight& sigma, const Weight& w, const Quadrature& quad,
                                 const Transform& tr = Transform::gradient());

struct OperatorNorm {
  double norm = 0.0;
  GridFunction maximizer;  // unit ‖·‖_σ extremal f (zero if norm is zero)
};

/// Throws std::length_error above kMaxExactUnknowns charged cells; use
/// operator_norm_power there.
OperatorNorm operator_norm_exact(const Weight& sigma, const Weight& w, const Quadrature& quad,
                                 const Transform& tr = Transform::gradient());
double operator_norm_power(const Weight& sigma, const Weight& w, const Quadrature& quad,
                           const Transform& tr = Transform::gradient(), int max_iterations = 2000,
                           double tolerance = 1e-12);

/// Little-endian: uint64 dimension, then row-major float64 entries.
void write_operator_matrix(std::ostream& out, const OperatorMatrix& m);
OperatorMatrix read_operator_matrix(std::istream& in);

}  // namespace gw
