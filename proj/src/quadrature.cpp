#include "gw/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "gw/lattice.hpp"

namespace gw {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs at least one node");
  // Golub–Welsch: eigen-decomposition of the Jacobi matrix.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  x.resize(static_cast<std::size_t>(n));
  w.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    x[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    w[static_cast<std::size_t>(k)] = 2.0 * v * v;
  }
}

Quadrature::Quadrature(double t_min, double t_max, int nodes_per_octave, double anchor)
    : t_min_(t_min), t_max_(t_max), per_octave_(nodes_per_octave) {
  if (!(t_min > 0.0) || !(t_min < t_max)) throw std::invalid_argument("quadrature needs 0 < t_min < t_max");
  if (nodes_per_octave < 1) throw std::invalid_argument("quadrature needs at least one node per octave");
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_octave, gx, gw);
  const double lo_u = std::log(t_min);
  const double hi_u = std::log(t_max);
  const double ln2 = std::log(2.0);
  const double base = std::log(anchor);
  // Octave boundaries base + k ln2 clipped to [lo_u, hi_u].
  double k = std::floor((lo_u - base) / ln2);
  double a = lo_u;
  while (a < hi_u) {
    double b = base + (k + 1.0) * ln2;
    if (b <= a + 1e-14) {
      k += 1.0;
      continue;
    }
    b = std::min(b, hi_u);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      nodes_.push_back(std::exp(mid + half * gx[i]));
      weights_.push_back(half * gw[i]);
    }
    a = b;
    k += 1.0;
  }
}

Quadrature Quadrature::for_lattice(const LatticeSpec& spec, int nodes_per_octave) {
  return Quadrature(spec.t_min, spec.t_max, nodes_per_octave, spec.side);
}

double Quadrature::weight_sum(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] > lo && nodes_[i] <= hi) s += weights_[i];
  }
  return s;
}

}  // namespace gw
