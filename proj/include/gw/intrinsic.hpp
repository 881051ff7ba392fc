// Intrinsic square function over a finite Hölder test family. Values are
// lower-bound proxies for the sup over the full class.
#pragma once

#include <string>
#include <vector>

#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"
#include "gw/quadrature.hpp"

namespace gw {

struct FamilyMember {
  enum class Kind { Bump, Generator };
  Kind kind = Kind::Bump;
  double width = 1.0;   // bumps: support half-width (before the 2-d fit factor)
  int orientation = 0;  // bumps: 0..2n-1, odd axis = o / 2, sign = (o % 2 ? -1 : +1)
  int generator = 0;    // generators: ψ index as in kernels.hpp
  double scale = 1.0;   // overall multiplier

  /// Generator members are not compactly supported and sit outside the
  /// class proper.
  bool extension() const { return kind == Kind::Generator; }
  double operator()(const Point& x, int dim) const;
};

struct TestFamily {
  double alpha = 1.0;
  int dim = 1;
  std::vector<FamilyMember> members;

  std::size_t size() const { return members.size(); }
};

/// Odd tensor bumps at widths {1, 1/2, 1/4} and 2n orientations, plus the
/// n+1 normalized generators when requested.
TestFamily default_family(int dim, double alpha = 1.0, bool with_generators = true);
/// c with c·ψ of Lipschitz constant and oscillation at most 1.
double generator_normalization(int generator, int dim);
/// The singleton family {c·ψ^g}.
TestFamily generator_family(int generator, int dim);

/// JSON: {"alpha": a, "dim": n, "members": [{"kind": "bump", "width": w,
/// "orientation": o, "scale": s} | {"kind": "generator", "generator": g,
/// "scale": s}]}. Generator scale defaults to the normalization.
TestFamily family_from_json(const std::string& text);
std::string family_to_json(const TestFamily& family);

struct MemberCheck {
  double support_radius = 0.0;  // infinite for generators
  double mean = 0.0;
  double holder_quotient = 0.0;
};
/// Sampled support radius, |∫φ| and max |φ(x)-φ(x')| / |x-x'|^α.
MemberCheck check_member(const FamilyMember& m, double alpha, int dim);

/// max over members of |φ_t * fw(y)|.
double a_alpha(const SignedAtoms& fw, const TestFamily& family, const Point& y, double t);
double a_alpha(const Weight& fw, const TestFamily& family, const Point& y, double t);

/// ‖(Σ_t q_t A_α(fσ)(·, t)²)^{1/2}‖_{L²(w)}.
double g_alpha_norm(const GridFunction& f, const Weight& sigma, const Weight& w, const TestFamily& family,
                    const Quadrature& quad);

/// sup_R (σ(R)^{-1} Σ_{x ∈ R} w(x) Σ_{t ≤ l(R)} q_t A_α(σ 1_R)(x, t)²)^{1/2}.
double intrinsic_testing_constant(const Weight& sigma, const Weight& w, const TestFamily& family,
                                  const DyadicGrid& grid, const Quadrature& quad);

}  // namespace gw
