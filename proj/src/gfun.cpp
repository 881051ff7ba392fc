#include "gw/gfun.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include "gw/kernels.hpp"

namespace gw {

std::vector<int> Transform::components(int dim) const {
  if (kind == Kind::PsiGenerator) {
    if (generator < 0 || generator > dim) throw std::invalid_argument("generator index out of range");
    return {generator};
  }
  std::vector<int> c;
  for (int g = 0; g <= dim; ++g) c.push_back(g);
  return c;
}

std::string Transform::name() const {
  if (kind == Kind::PoissonGradient) return "poisson-gradient";
  return "psi-generator-" + std::to_string(generator);
}

double field_squared(const SignedAtoms& mu, const Transform& tr, const Point& x, double t, const LatticeSpec& spec) {
  double s = 0.0;
  for (int c : tr.components(spec.dim)) {
    const double v = psi_t_convolve(mu, c, x, t, spec.dim, spec.side);
    s += v * v;
  }
  return s;
}

double g_value(const SignedAtoms& fw, const Point& x, const Quadrature& quad, const LatticeSpec& spec,
               const Transform& tr) {
  double s = 0.0;
  for (std::size_t k = 0; k < quad.size(); ++k) s += quad.weights()[k] * field_squared(fw, tr, x, quad.nodes()[k], spec);
  return std::sqrt(s);
}

double g_value(const Weight& fw, const Point& x, const Quadrature& quad) {
  return g_value(atoms_of(fw), x, quad, fw.spec());
}

double g_norm(const GridFunction& f, const Weight& sigma, const Weight& w, const Quadrature& quad,
              const Transform& tr) {
  const SignedAtoms mu = atoms_of(f, sigma);
  if (mu.masses.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] == 0.0) continue;
    const double g = g_value(mu, w.spec().cell_center(c), quad, w.spec(), tr);
    s += w[c] * g * g;
  }
  return std::sqrt(s);
}

double region_integral(const SignedAtoms& mu, const Transform& tr, const Weight& w,
                       const std::vector<std::size_t>& cells, const Quadrature& quad, double lo, double hi) {
  if (mu.masses.empty()) return 0.0;
  const auto& spec = w.spec();
  double s = 0.0;
  for (std::size_t c : cells) {
    if (w[c] == 0.0) continue;
    const Point x = spec.cell_center(c);
    double inner = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const double t = quad.nodes()[k];
      if (t <= lo || t > hi) continue;
      inner += quad.weights()[k] * field_squared(mu, tr, x, t, spec);
    }
    s += w[c] * inner;
  }
  return s;
}

double box_integral(const DyadicCube& i, const Weight& sigma, const Weight& w, const Quadrature& quad,
                    const Transform& tr) {
  const auto& spec = sigma.spec();
  const auto cells = i.cells(spec);
  SignedAtoms mu;
  for (std::size_t c : cells) {
    if (sigma[c] == 0.0) continue;
    mu.positions.push_back(spec.cell_center(c));
    mu.masses.push_back(sigma[c]);
  }
  return region_integral(mu, tr, w, cells, quad, 0.0, i.side(spec));
}

double whitney_integral(const DyadicCube& r, const SignedAtoms& fw, const Transform& tr, const Weight& w,
                        const Quadrature& quad) {
  const double l = r.side(w.spec());
  return region_integral(fw, tr, w, r.cells(w.spec()), quad, 0.5 * l, l);
}

double strip_integral(const SignedAtoms& fw, const Transform& tr, const Weight& w, const Quadrature& quad,
                      double lo, double hi) {
  std::vector<std::size_t> all(w.size());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  return region_integral(fw, tr, w, all, quad, lo, hi);
}

std::pair<double, double> whitney_t_range(const LatticeSpec& spec) {
  return {spec.side * std::exp2(-(spec.depth + 1)), spec.side};
}

OperatorMatrix assemble_operator(const Weight& sigma, const Weight& w, const Quadrature& quad, const Transform& tr) {
  const auto& spec = sigma.spec();
  OperatorMatrix op;
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    if (sigma[c] > 0.0) op.cells.push_back(c);
  }
  std::vector<std::size_t> targets;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] > 0.0) targets.push_back(c);
  }
  const auto ns = static_cast<Eigen::Index>(op.cells.size());
  const auto nw = static_cast<Eigen::Index>(targets.size());
  op.matrix = Eigen::MatrixXd::Zero(ns, ns);
  if (ns == 0 || nw == 0) return op;
  const auto comps = tr.components(spec.dim);
  Eigen::MatrixXd block(nw * static_cast<Eigen::Index>(comps.size()), ns);
  for (std::size_t k = 0; k < quad.size(); ++k) {
    const double t = quad.nodes()[k];
    const double q = quad.weights()[k];
    for (Eigen::Index i = 0; i < nw; ++i) {
      const Point x = spec.cell_center(targets[static_cast<std::size_t>(i)]);
      const double row_scale = std::sqrt(w[targets[static_cast<std::size_t>(i)]] * q);
      for (Eigen::Index j = 0; j < ns; ++j) {
        const std::size_t cell = op.cells[static_cast<std::size_t>(j)];
        const Point y = spec.cell_center(cell);
        const Point d{x[0] - y[0], x[1] - y[1]};
        const double col_scale = std::sqrt(sigma[cell]);
        for (std::size_t c = 0; c < comps.size(); ++c) {
          block(static_cast<Eigen::Index>(c) * nw + i, j) = psi_t(comps[c], d, t, spec.dim) * row_scale * col_scale;
        }
      }
    }
    op.matrix.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
  }
  op.matrix.triangularView<Eigen::StrictlyUpper>() = op.matrix.transpose();
  return op;
}

OperatorNorm operator_norm_exact(const Weight& sigma, const Weight& w, const Quadrature& quad, const Transform& tr) {
  std::size_t charged = 0;
  for (double m : sigma.masses()) charged += m > 0.0 ? 1 : 0;
  if (charged > kMaxExactUnknowns) {
    throw std::length_error("operator has " + std::to_string(charged) +
                            " unknowns, above the dense eigensolve limit; use power iteration");
  }
  OperatorNorm out{0.0, GridFunction(sigma.spec())};
  const OperatorMatrix op = assemble_operator(sigma, w, quad, tr);
  if (op.cells.empty()) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
  const Eigen::Index top = op.matrix.rows() - 1;
  const double lambda = std::max(0.0, es.eigenvalues()(top));
  out.norm = std::sqrt(lambda);
  if (lambda > 0.0) {
    for (std::size_t j = 0; j < op.cells.size(); ++j) {
      const std::size_t cell = op.cells[j];
      out.maximizer[cell] = es.eigenvectors()(static_cast<Eigen::Index>(j), top) / std::sqrt(sigma[cell]);
    }
  }
  return out;
}

double operator_norm_power(const Weight& sigma, const Weight& w, const Quadrature& quad, const Transform& tr,
                           int max_iterations, double tolerance) {
  const OperatorMatrix op = assemble_operator(sigma, w, quad, tr);
  if (op.cells.empty()) return 0.0;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd v(op.matrix.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next = op.matrix * v;
    const double est = v.dot(next);
    const double nrm = next.norm();
    if (nrm == 0.0) return 0.0;
    v = next / nrm;
    if (std::fabs(est - lambda) <= tolerance * std::fabs(est)) {
      lambda = est;
      break;
    }
    lambda = est;
  }
  return std::sqrt(std::max(0.0, lambda));
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("truncated operator matrix stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_operator_matrix(std::ostream& out, const OperatorMatrix& m) {
  const auto n = static_cast<std::uint64_t>(m.matrix.rows());
  put_le<std::uint64_t>(out, n);
  for (Eigen::Index i = 0; i < m.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) put_le<double>(out, m.matrix(i, j));
  }
}

OperatorMatrix read_operator_matrix(std::istream& in) {
  const auto n = static_cast<Eigen::Index>(get_le<std::uint64_t>(in));
  OperatorMatrix m;
  m.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m.matrix(i, j) = get_le<double>(in);
  }
  return m;
}

}  // namespace gw
