#include "gw/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gw/kernels.hpp"
#include "json.hpp"

namespace gw {

namespace {

/// s(u) = u (1 - |u|) on [-1, 1]: odd, Lipschitz 1, sup 1/4.
double odd_profile(double u) { return std::fabs(u) > 1.0 ? 0.0 : u * (1.0 - std::fabs(u)); }

constexpr double kTensorDamping = 0.97;

double norm(const Point& x, int dim) { return dim == 1 ? std::fabs(x[0]) : std::hypot(x[0], x[1]); }

}  // namespace

double FamilyMember::operator()(const Point& x, int dim) const {
  if (kind == Kind::Generator) return scale * psi(generator, x, dim);
  const double sign = orientation % 2 == 0 ? 1.0 : -1.0;
  if (dim == 1) return scale * sign * width * odd_profile(x[0] / width);
  const double w = width / std::numbers::sqrt2;
  const int axis = (orientation / 2) % 2;
  const double u = x[static_cast<std::size_t>(axis)] / w;
  const double v = x[static_cast<std::size_t>(1 - axis)] / w;
  if (std::fabs(u) > 1.0 || std::fabs(v) > 1.0) return 0.0;
  return scale * sign * w * kTensorDamping * odd_profile(u) * (1.0 - std::fabs(v));
}

double generator_normalization(int generator, int dim) {
  const double h = 1e-6;
  double lip = 0.0;
  double sup = 0.0;
  auto visit = [&](const Point& p) {
    const double v = psi(generator, p, dim);
    sup = std::max(sup, std::fabs(v));
    double g2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      Point hi = p;
      Point lo = p;
      hi[static_cast<std::size_t>(a)] += h;
      lo[static_cast<std::size_t>(a)] -= h;
      const double d = (psi(generator, hi, dim) - psi(generator, lo, dim)) / (2.0 * h);
      g2 += d * d;
    }
    lip = std::max(lip, std::sqrt(g2));
  };
  if (dim == 1) {
    for (int i = -6000; i <= 6000; ++i) visit({i * 1e-3, 0.0});
  } else {
    for (int i = -400; i <= 400; ++i) {
      for (int j = -400; j <= 400; ++j) visit({i * 1e-2, j * 1e-2});
    }
  }
  return 1.0 / (std::max(lip, 2.0 * sup) * (1.0 + 1e-3));
}

TestFamily default_family(int dim, double alpha, bool with_generators) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
  if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("alpha must lie in (0, 1]");
  TestFamily fam;
  fam.alpha = alpha;
  fam.dim = dim;
  for (double width : {1.0, 0.5, 0.25}) {
    for (int o = 0; o < 2 * dim; ++o) {
      FamilyMember m;
      m.width = width;
      m.orientation = o;
      fam.members.push_back(m);
    }
  }
  if (with_generators) {
    for (int g = 0; g <= dim; ++g) fam.members.push_back(generator_family(g, dim).members.front());
  }
  return fam;
}

TestFamily generator_family(int generator, int dim) {
  TestFamily fam;
  fam.dim = dim;
  FamilyMember m;
  m.kind = FamilyMember::Kind::Generator;
  m.generator = generator;
  m.scale = generator_normalization(generator, dim);
  fam.members.push_back(m);
  return fam;
}

TestFamily family_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TestFamily fam;
  fam.alpha = j.value("alpha", 1.0);
  fam.dim = j.value("dim", 1);
  if (fam.dim != 1 && fam.dim != 2) throw std::invalid_argument("family dim must be 1 or 2");
  if (!(fam.alpha > 0.0) || fam.alpha > 1.0) throw std::invalid_argument("family alpha must lie in (0, 1]");
  for (const auto& e : j.at("members")) {
    FamilyMember m;
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "bump") {
      m.width = e.value("width", 1.0);
      m.orientation = e.value("orientation", 0);
      m.scale = e.value("scale", 1.0);
      if (!(m.width > 0.0) || m.width > 1.0) throw std::invalid_argument("bump width must lie in (0, 1]");
      if (m.orientation < 0 || m.orientation >= 2 * fam.dim) throw std::invalid_argument("bad bump orientation");
      if (std::fabs(m.scale) > 1.0) throw std::invalid_argument("bump scale must be at most 1");
    } else if (kind == "generator") {
      m.kind = FamilyMember::Kind::Generator;
      m.generator = e.value("generator", 0);
      if (m.generator < 0 || m.generator > fam.dim) throw std::invalid_argument("bad generator index");
      m.scale = e.contains("scale") ? e["scale"].get<double>() : generator_normalization(m.generator, fam.dim);
    } else {
      throw std::invalid_argument("unknown family member kind: " + kind);
    }
    fam.members.push_back(m);
  }
  return fam;
}

std::string family_to_json(const TestFamily& family) {
  nlohmann::json j;
  j["alpha"] = family.alpha;
  j["dim"] = family.dim;
  j["members"] = nlohmann::json::array();
  for (const auto& m : family.members) {
    if (m.kind == FamilyMember::Kind::Bump) {
      j["members"].push_back({{"kind", "bump"}, {"width", m.width}, {"orientation", m.orientation}, {"scale", m.scale}});
    } else {
      j["members"].push_back({{"kind", "generator"}, {"generator", m.generator}, {"scale", m.scale}, {"extension", true}});
    }
  }
  return j.dump(2);
}

MemberCheck check_member(const FamilyMember& m, double alpha, int dim) {
  MemberCheck out;
  if (m.extension()) {
    out.support_radius = std::numeric_limits<double>::infinity();
    out.mean = std::fabs(m.scale) * u11_check(m.generator, dim).cancel_residual;
  } else {
    const int k = dim == 1 ? 20000 : 500;
    const double h = 2.0 / k;
    double integral = 0.0;
    auto cell = [&](const Point& p, double area) {
      const double v = m(p, dim);
      integral += v * area;
      if (v != 0.0) out.support_radius = std::max(out.support_radius, norm(p, dim));
    };
    if (dim == 1) {
      for (int i = 0; i < k; ++i) cell({-1.0 + (i + 0.5) * h, 0.0}, h);
    } else {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) cell({-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h}, h * h);
      }
    }
    out.mean = std::fabs(integral);
  }
  std::mt19937_64 rng(0xb0b5);
  std::uniform_real_distribution<double> box(-1.5, 1.5);
  std::uniform_real_distribution<double> logd(-5.0, 0.5);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 100000; ++i) {
    const Point x{box(rng), dim == 2 ? box(rng) : 0.0};
    const double d = std::pow(10.0, logd(rng));
    const double th = angle(rng);
    const Point y = dim == 1 ? Point{x[0] + (th < std::numbers::pi ? d : -d), 0.0}
                             : Point{x[0] + d * std::cos(th), x[1] + d * std::sin(th)};
    const double q = std::fabs(m(x, dim) - m(y, dim)) / std::pow(d, alpha);
    out.holder_quotient = std::max(out.holder_quotient, q);
  }
  return out;
}

double a_alpha(const SignedAtoms& fw, const TestFamily& family, const Point& y, double t) {
  if (family.members.empty()) throw std::domain_error("empty test family");
  if (!(t > 0.0)) throw std::domain_error("a_alpha needs t > 0");
  const int n = family.dim;
  const double scale = n == 1 ? 1.0 / t : 1.0 / (t * t);
  double best = 0.0;
  for (const auto& m : family.members) {
    double s = 0.0;
    for (std::size_t a = 0; a < fw.masses.size(); ++a) {
      const Point z{(y[0] - fw.positions[a][0]) / t, (y[1] - fw.positions[a][1]) / t};
      s += m(z, n) * fw.masses[a];
    }
    best = std::max(best, std::fabs(s * scale));
  }
  return best;
}

double a_alpha(const Weight& fw, const TestFamily& family, const Point& y, double t) {
  return a_alpha(atoms_of(fw), family, y, t);
}

namespace {

double intrinsic_region(const SignedAtoms& mu, const TestFamily& family, const Weight& w,
                        const std::vector<std::size_t>& cells, const Quadrature& quad, double hi) {
  const auto& spec = w.spec();
  double total = 0.0;
  for (std::size_t c : cells) {
    if (w[c] == 0.0) continue;
    const Point x = spec.cell_center(c);
    double s = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const double t = quad.nodes()[k];
      if (t > hi) continue;
      const double a = a_alpha(mu, family, x, t);
      s += quad.weights()[k] * a * a;
    }
    total += w[c] * s;
  }
  return total;
}

}  // namespace

double g_alpha_norm(const GridFunction& f, const Weight& sigma, const Weight& w, const TestFamily& family,
                    const Quadrature& quad) {
  if (family.members.empty()) throw std::domain_error("empty test family");
  const auto mu = atoms_of(f, sigma);
  if (mu.masses.empty() || w.is_zero()) return 0.0;
  std::vector<std::size_t> all(w.size());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  return std::sqrt(intrinsic_region(mu, family, w, all, quad, std::numeric_limits<double>::infinity()));
}

double intrinsic_testing_constant(const Weight& sigma, const Weight& w, const TestFamily& family,
                                  const DyadicGrid& grid, const Quadrature& quad) {
  if (family.members.empty()) throw std::domain_error("empty test family");
  if (family.dim != grid.spec().dim) throw std::invalid_argument("family and lattice dimensions differ");
  const auto& spec = grid.spec();
  double best = 0.0;
  for (const auto& q : grid.all_cubes()) {
    const double s = mass(sigma, q);
    if (s == 0.0 || mass(w, q) == 0.0) continue;
    const auto mu = atoms_of(sigma.restricted(q));
    best = std::max(best, intrinsic_region(mu, family, w, q.cells(spec), quad, q.side(spec)) / s);
  }
  return std::sqrt(best);
}

}  // namespace gw
