// Log-t quadrature for the dt/t and t dt integrals.
#pragma once

#include <vector>

namespace gw {

struct LatticeSpec;

/// Gauss–Legendre in u = ln t on panels aligned to the octaves anchor·2^k,
/// clipped to [t_min, t_max]. Weights integrate F(t) dt/t; a t dt integral of
/// G uses F = t² G.
class Quadrature {
 public:
  Quadrature(double t_min, double t_max, int nodes_per_octave = 16, double anchor = 1.0);
  static Quadrature for_lattice(const LatticeSpec& spec, int nodes_per_octave = 16);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  int nodes_per_octave() const { return per_octave_; }

  /// Sum of weights over nodes with lo < t <= hi.
  double weight_sum(double lo, double hi) const;

 private:
  double t_min_;
  double t_max_;
  int per_octave_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Gauss–Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace gw
