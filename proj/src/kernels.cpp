#include "gw/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace gw {

namespace {

double norm2(const Point& x, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += x[i] * x[i];
  return s;
}

void require_positive_t(double t) {
  if (!(t > 0.0)) throw std::domain_error("Poisson kernel needs t > 0");
}

}  // namespace

double poisson_normalization(int dim) {
  const double a = 0.5 * (dim + 1);
  return std::tgamma(a) / std::pow(std::numbers::pi, a);
}

double poisson(const Point& x, double t, int dim) {
  require_positive_t(t);
  const double u = norm2(x, dim) / (t * t);
  return poisson_normalization(dim) * std::pow(t, -dim) * std::pow(1.0 + u, -0.5 * (dim + 1));
}

double dt_poisson(const Point& x, double t, int dim) {
  require_positive_t(t);
  const double r2 = norm2(x, dim);
  return poisson_normalization(dim) * (r2 - dim * t * t) / std::pow(t * t + r2, 0.5 * (dim + 3));
}

std::array<double, 3> grad_poisson(const Point& x, double t, int dim) {
  require_positive_t(t);
  const double c = poisson_normalization(dim);
  const double r2 = norm2(x, dim);
  const double denom = std::pow(t * t + r2, 0.5 * (dim + 3));
  std::array<double, 3> g{0.0, 0.0, 0.0};
  g[0] = c * (r2 - dim * t * t) / denom;
  for (int i = 0; i < dim; ++i) g[static_cast<std::size_t>(i + 1)] = -c * (dim + 1) * t * x[i] / denom;
  return g;
}

double psi(int generator, const Point& x, int dim) {
  if (generator < 0 || generator > dim) throw std::invalid_argument("generator index out of range");
  const double c = poisson_normalization(dim);
  const double r2 = norm2(x, dim);
  const double q = 1.0 + r2;
  const double denom = dim == 1 ? q * q : q * q * std::sqrt(q);
  if (generator == 0) return c * (r2 - dim) / denom;
  return -c * (dim + 1) * x[generator - 1] / denom;
}

double psi_t(int generator, const Point& y, double t, int dim) {
  require_positive_t(t);
  const Point s{y[0] / t, y[1] / t};
  return psi(generator, s, dim) / (dim == 1 ? t : t * t);
}

double psi_t_convolve(const SignedAtoms& mu, int generator, const Point& x, double t, int dim, double side) {
  const double cutoff = kCutoffSides * side;
  double s = 0.0;
  for (std::size_t a = 0; a < mu.masses.size(); ++a) {
    const Point& y = mu.positions[a];
    const Point d{x[0] - y[0], x[1] - y[1]};
    if (std::sqrt(norm2(d, dim)) > cutoff) continue;
    s += psi_t(generator, d, t, dim) * mu.masses[a];
  }
  return s;
}

double psi_t_convolve(const Weight& fw, int generator, const Point& x, double t) {
  return psi_t_convolve(atoms_of(fw), generator, x, t, fw.spec().dim, fw.spec().side);
}

U11Constants u11_check(int generator, int dim) {
  U11Constants out;
  const double radius = 1000.0;
  // Decay: sampled sup of |ψ(x)| (1+|x|)^{n+1} on a radial log grid plus
  // random directions.
  std::mt19937_64 rng(0x5eed + static_cast<std::uint64_t>(generator));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_point = [&](double rad) {
    Point p{unit(rng), dim == 2 ? unit(rng) : 0.0};
    const double nrm = std::sqrt(norm2(p, dim));
    if (nrm == 0.0) return Point{rad, 0.0};
    return Point{p[0] / nrm * rad, p[1] / nrm * rad};
  };
  const int radial = 4000;
  for (int i = 0; i <= radial; ++i) {
    const double rad = (i == 0) ? 0.0 : std::pow(10.0, -3.0 + 6.0 * i / radial);
    for (int k = 0; k < (dim == 1 ? 2 : 8); ++k) {
      Point p = random_point(std::min(rad, radius));
      if (dim == 1) p = Point{k == 0 ? rad : -rad, 0.0};
      const double v = std::fabs(psi(generator, p, dim)) * std::pow(1.0 + std::sqrt(norm2(p, dim)), dim + 1);
      out.c_decay = std::max(out.c_decay, v);
    }
  }
  // Smoothness: random pairs at all scales.
  std::uniform_real_distribution<double> logr(-3.0, 3.0);
  for (int i = 0; i < 200000; ++i) {
    const Point x = random_point(std::pow(10.0, logr(rng)));
    Point dx = random_point(std::pow(10.0, logr(rng)) * 1e-1);
    const Point y{x[0] + dx[0], x[1] + dx[1]};
    const double gap = std::sqrt(norm2(dx, dim));
    if (gap == 0.0) continue;
    const double w = gap * (std::pow(1.0 + std::sqrt(norm2(x, dim)), -dim - 2) +
                            std::pow(1.0 + std::sqrt(norm2(y, dim)), -dim - 2));
    out.c_smooth = std::max(out.c_smooth, std::fabs(psi(generator, x, dim) - psi(generator, y, dim)) / w);
  }
  // Cancellation: x = tan θ on the line; polar r = tan θ in the plane.
  const int m = dim == 1 ? 20000 : 4000;
  const double h = 0.5 * std::numbers::pi / m;
  double integral = 0.0;
  if (dim == 1) {
    for (int i = -m; i < m; ++i) {
      const double th = (i + 0.5) * h;
      const double c = std::cos(th);
      integral += psi(generator, {std::tan(th), 0.0}, 1) / (c * c) * h;
    }
  } else {
    const int angles = 64;
    const double dphi = 2.0 * std::numbers::pi / angles;
    for (int k = 0; k < angles; ++k) {
      const double phi = (k + 0.5) * dphi;
      for (int i = 0; i < m; ++i) {
        const double th = (i + 0.5) * h;
        const double c = std::cos(th);
        const double r = std::tan(th);
        integral += psi(generator, {r * std::cos(phi), r * std::sin(phi)}, 2) * r / (c * c) * h * dphi;
      }
    }
  }
  out.cancel_residual = std::fabs(integral);
  return out;
}

double poisson_avg(const DyadicCube& k, const SignedAtoms& mu, const LatticeSpec& spec) {
  const double lk = k.side(spec);
  const int n = spec.dim;
  double s = 0.0;
  for (std::size_t a = 0; a < mu.masses.size(); ++a) {
    const double d = k.distance_to(spec, mu.positions[a]);
    s += lk / std::pow(lk + d, n + 1) * mu.masses[a];
  }
  return s;
}

double poisson_avg(const DyadicCube& k, const Weight& mu) { return poisson_avg(k, atoms_of(mu), mu.spec()); }

double avg_operator(const GridFunction& f, const Weight& sigma, double r, const Point& x) {
  if (!(r > 0.0)) throw std::domain_error("averaging scale must be positive");
  const auto& spec = sigma.spec();
  double s = 0.0;
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    if (sigma[c] == 0.0) continue;
    const Point y = spec.cell_center(c);
    bool inside = true;
    for (int a = 0; a < spec.dim && inside; ++a) inside = (x[a] - 0.5 * r <= y[a]) && (y[a] < x[a] + 0.5 * r);
    if (inside) s += f[c] * sigma[c];
  }
  return s / std::pow(r, spec.dim);
}

double k_alpha(const Point& x, const Point& y, double alpha, double t, int dim) {
  return std::pow(t, alpha) / std::pow(t + distance(x, y, dim), dim + alpha);
}

double i_alpha(const GridFunction& f, const Weight& sigma, double alpha, double t, const Point& x) {
  if (!(alpha > 0.0) || !(t > 0.0)) throw std::domain_error("i_alpha needs alpha > 0 and t > 0");
  const auto& spec = sigma.spec();
  double s = 0.0;
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    if (sigma[c] == 0.0) continue;
    s += k_alpha(x, spec.cell_center(c), alpha, t, spec.dim) * f[c] * sigma[c];
  }
  return s;
}

}  // namespace gw
