#include "gw/constants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "gw/kernels.hpp"

namespace gw {

namespace {

void require_same_lattice(const Weight& a, const Weight& b, const DyadicGrid& grid) {
  if (!(a.spec() == b.spec()) || !(a.spec() == grid.spec())) {
    throw std::invalid_argument("weights and grid live on different lattices");
  }
}

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

using CubeKey = std::pair<int, std::size_t>;
CubeKey key_of(const DyadicCube& q) { return {q.level(), q.level_slot()}; }

/// Partition values for one candidate top cube I0: val(J) is the Whitney sum
/// of P(K, 1_{I0}σ)² w(K) over 𝒲_J.
class PivotalSums {
 public:
  PivotalSums(const DyadicGrid& grid, WhitneyCache& whitney, const std::vector<std::vector<double>>& w_mass,
              const Weight& sigma, const DyadicCube& i0)
      : grid_(grid), whitney_(whitney), w_mass_(w_mass), atoms_(atoms_of(sigma.restricted(i0))) {}

  double val(const DyadicCube& j) {
    const auto key = key_of(j);
    if (auto it = val_.find(key); it != val_.end()) return it->second;
    double s = 0.0;
    for (const auto& m : whitney_.get(j).members) {
      const double wk = w_mass_[static_cast<std::size_t>(m.cube.level())][m.cube.level_slot()];
      if (wk == 0.0) continue;
      const double p = poisson_avg(m.cube, atoms_, grid_.spec());
      s += p * p * wk;
    }
    val_.emplace(key, s);
    return s;
  }

  double best(const DyadicCube& j) {
    if (j.level() == grid_.depth()) return val(j);
    double below = 0.0;
    for (const auto& c : grid_.children(j)) below += best(c);
    return std::max(val(j), below);
  }

  double greedy(const DyadicCube& j) {
    if (j.level() == grid_.depth()) return val(j);
    double below = 0.0;
    const auto kids = grid_.children(j);
    for (const auto& c : kids) below += val(c);
    if (val(j) >= below) return val(j);
    double s = 0.0;
    for (const auto& c : kids) s += greedy(c);
    return s;
  }

  double sample(const DyadicCube& j, std::mt19937_64& rng) {
    if (j.level() == grid_.depth() || (rng() & 1u) == 0u) return val(j);
    double s = 0.0;
    for (const auto& c : grid_.children(j)) s += sample(c, rng);
    return s;
  }

  std::vector<double> all_sums(const DyadicCube& j) {
    std::vector<double> out{val(j)};
    if (j.level() == grid_.depth()) return out;
    std::vector<double> combos{0.0};
    for (const auto& c : grid_.children(j)) {
      const auto sub = all_sums(c);
      std::vector<double> next;
      next.reserve(combos.size() * sub.size());
      for (double a : combos) {
        for (double b : sub) next.push_back(a + b);
      }
      combos = std::move(next);
    }
    out.insert(out.end(), combos.begin(), combos.end());
    return out;
  }

 private:
  const DyadicGrid& grid_;
  WhitneyCache& whitney_;
  const std::vector<std::vector<double>>& w_mass_;
  SignedAtoms atoms_;
  std::map<CubeKey, double> val_;
};

/// Number of dyadic partitions of a level-`level` cube, saturating at cap.
double partition_count(int level, int depth, int dim, double cap) {
  double count = 1.0;
  for (int l = depth - 1; l >= level; --l) {
    count = 1.0 + std::pow(count, 1 << dim);
    if (count > cap) return cap + 1.0;
  }
  return count;
}

}  // namespace

std::vector<std::vector<double>> level_masses(const Weight& w, const DyadicGrid& grid) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(grid.depth() + 1));
  for (int l = 0; l <= grid.depth(); ++l) {
    auto& row = out[static_cast<std::size_t>(l)];
    row.assign(grid.level_size(l), 0.0);
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (w[c] != 0.0) row[grid.containing(c, l).level_slot()] += w[c];
    }
  }
  return out;
}

A2Witness a2_witness(const Weight& sigma, const Weight& w, const DyadicGrid& grid) {
  require_same_lattice(sigma, w, grid);
  const auto& spec = grid.spec();
  const auto n = static_cast<std::size_t>(spec.cells_per_axis());
  const std::size_t rows = spec.dim == 1 ? 1 : n;
  // Summed-area tables over cell coordinates, (rows + 1) x (n + 1).
  // Charged-cell counts identify empty boxes exactly.
  auto table = [&](const Weight& m, bool count_only) {
    std::vector<double> t((rows + 1) * (n + 1), 0.0);
    for (std::size_t y = 0; y < rows; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        const double v = count_only ? (m[x + y * n] > 0.0 ? 1.0 : 0.0) : m[x + y * n];
        t[(y + 1) * (n + 1) + x + 1] = v + t[y * (n + 1) + x + 1] + t[(y + 1) * (n + 1) + x] - t[y * (n + 1) + x];
      }
    }
    return t;
  };
  const auto ts = table(sigma, false);
  const auto tw = table(w, false);
  const auto cs = table(sigma, true);
  const auto cw = table(w, true);
  auto box = [&](const std::vector<double>& t, std::size_t x0, std::size_t y0, std::size_t k, std::size_t ky) {
    return t[(y0 + ky) * (n + 1) + x0 + k] - t[y0 * (n + 1) + x0 + k] - t[(y0 + ky) * (n + 1) + x0] +
           t[y0 * (n + 1) + x0];
  };
  // Every cell-aligned cube inside Q0; beyond kA2Budget cubes the positions
  // of side-k cubes are visited on a stride of ceil(k / 16) cells.
  constexpr double kA2Budget = 1 << 30;
  double count = 0.0;
  for (std::size_t k = 1; k <= n; ++k) count += std::pow(static_cast<double>(n - k + 1), spec.dim);
  const bool strided = count > kA2Budget;
  const double h = spec.cell_side();
  A2Witness best;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t step = strided ? (k + 15) / 16 : 1;
    const std::size_t ky = spec.dim == 1 ? 1 : k;
    const double vol = std::pow(static_cast<double>(k) * h, spec.dim);
    for (std::size_t y0 = 0; y0 + ky <= rows; y0 += spec.dim == 1 ? 1 : step) {
      for (std::size_t x0 = 0; x0 + k <= n; x0 += step) {
        if (box(cs, x0, y0, k, ky) < 0.5 || box(cw, x0, y0, k, ky) < 0.5) continue;
        const double v = box(ts, x0, y0, k, ky) * box(tw, x0, y0, k, ky) / (vol * vol);
        if (v > best.value) {
          best.value = v;
          best.lo = {static_cast<std::int64_t>(x0), static_cast<std::int64_t>(y0)};
          best.cells = static_cast<std::int64_t>(k);
        }
      }
    }
  }
  return best;
}

double a2_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid) {
  return a2_witness(sigma, w, grid).value;
}

double testing_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const Quadrature& quad,
                        const Transform& tr) {
  require_same_lattice(sigma, w, grid);
  const auto sm = level_masses(sigma, grid);
  const auto wm = level_masses(w, grid);
  double best = 0.0;
  for (const auto& q : grid.all_cubes()) {
    const auto li = static_cast<std::size_t>(q.level());
    const double s = sm[li][q.level_slot()];
    if (s == 0.0 || wm[li][q.level_slot()] == 0.0) continue;
    best = std::max(best, box_integral(q, sigma, w, quad, tr) / s);
  }
  return std::sqrt(best);
}

std::string to_string(PivotalOptions::Strategy s) {
  switch (s) {
    case PivotalOptions::Strategy::Exact: return "exact";
    case PivotalOptions::Strategy::Enumerate: return "enumerate";
    case PivotalOptions::Strategy::Greedy: return "greedy";
    case PivotalOptions::Strategy::Sampled: return "sampled";
  }
  return "unknown";
}

PivotalResult pivotal_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid,
                               const PivotalOptions& options) {
  require_same_lattice(sigma, w, grid);
  PivotalResult result;
  result.strategy = to_string(options.strategy);
  if (options.strategy == PivotalOptions::Strategy::Sampled) {
    result.strategy += "(" + std::to_string(options.samples) + ")";
  }
  const auto sm = level_masses(sigma, grid);
  std::vector<DyadicCube> tops;
  for (const auto& q : grid.all_cubes()) {
    if (sm[static_cast<std::size_t>(q.level())][q.level_slot()] > 0.0) tops.push_back(q);
  }
  if (options.strategy == PivotalOptions::Strategy::Enumerate) {
    double total = 0.0;
    const double cap = static_cast<double>(options.enumeration_budget);
    for (const auto& q : tops) total += partition_count(q.level(), grid.depth(), grid.spec().dim, cap);
    if (total > cap) {
      throw std::length_error("partition enumeration exceeds the budget of " +
                              std::to_string(options.enumeration_budget));
    }
  }
  if (w.is_zero() || tops.empty()) return result;

  const auto wm = level_masses(w, grid);
  WhitneyCache whitney(grid);
  std::mt19937_64 rng(options.seed);
  const int per_top = options.strategy == PivotalOptions::Strategy::Sampled
                          ? std::max(1, (options.samples + static_cast<int>(tops.size()) - 1) /
                                            static_cast<int>(tops.size()))
                          : 0;
  double best = 0.0;
  for (const auto& i0 : tops) {
    PivotalSums sums(grid, whitney, wm, sigma, i0);
    double v = 0.0;
    switch (options.strategy) {
      case PivotalOptions::Strategy::Exact: v = sums.best(i0); break;
      case PivotalOptions::Strategy::Greedy: v = sums.greedy(i0); break;
      case PivotalOptions::Strategy::Sampled:
        for (int k = 0; k < per_top; ++k) v = std::max(v, sums.sample(i0, rng));
        break;
      case PivotalOptions::Strategy::Enumerate: {
        const auto all = sums.all_sums(i0);
        v = *std::max_element(all.begin(), all.end());
        break;
      }
    }
    best = std::max(best, v / sm[static_cast<std::size_t>(i0.level())][i0.level_slot()]);
  }
  result.value = std::sqrt(best);
  return result;
}

double pivotal_partition_sum(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const DyadicCube& i0,
                             const std::vector<DyadicCube>& partition) {
  require_same_lattice(sigma, w, grid);
  std::size_t covered = 0;
  for (const auto& q : partition) {
    if (!grid.contains(i0, q)) throw std::domain_error("partition cube outside I0");
    covered += q.cell_count();
  }
  if (covered != i0.cell_count()) throw std::domain_error("cubes do not partition I0");
  const auto wm = level_masses(w, grid);
  WhitneyCache whitney(grid);
  PivotalSums sums(grid, whitney, wm, sigma, i0);
  double s = 0.0;
  for (const auto& q : partition) s += sums.val(q);
  return s;
}

double half_poisson_constant(const Weight& sigma, const Weight& w, const DyadicGrid& grid) {
  require_same_lattice(sigma, w, grid);
  const auto& spec = grid.spec();
  const auto atoms = atoms_of(sigma);
  const auto wm = level_masses(w, grid);
  double best = 0.0;
  for (const auto& q : grid.all_cubes()) {
    const double wq = wm[static_cast<std::size_t>(q.level())][q.level_slot()];
    if (wq == 0.0) continue;
    const double l = q.side(spec);
    double s = 0.0;
    for (std::size_t a = 0; a < atoms.masses.size(); ++a) {
      const double d = q.distance_to(spec, atoms.positions[a]);
      s += l * l / std::pow(l + d, 2 * (spec.dim + 1)) * atoms.masses[a];
    }
    best = std::max(best, s * wq);
  }
  return best;
}

double bilinear_coefficient(const DyadicCube& q, const DyadicCube& r, double alpha, const Weight& sigma,
                            const Weight& w) {
  if (!(alpha > 0.0)) throw std::domain_error("bilinear form needs alpha > 0");
  const auto& spec = sigma.spec();
  const double lq = q.side(spec);
  const double lr = r.side(spec);
  const double d = lq + lr + q.distance_to(spec, r);
  return std::pow(lq * lr, 0.5 * alpha) * std::pow(d, -(spec.dim + alpha)) * std::sqrt(mass(sigma, q)) *
         std::sqrt(mass(w, r));
}

double bilinear_form(double alpha, const CubeCoefficients& x, const CubeCoefficients& y, const Weight& sigma,
                     const Weight& w) {
  double s = 0.0;
  for (const auto& [q, xq] : x) {
    if (xq == 0.0) continue;
    for (const auto& [r, yr] : y) {
      if (yr != 0.0) s += bilinear_coefficient(q, r, alpha, sigma, w) * xq * yr;
    }
  }
  return s;
}

double bilinear_form_ratio(const DyadicGrid& grid, double alpha, const CubeCoefficients& x,
                           const CubeCoefficients& y, const Weight& sigma, const Weight& w) {
  double nx = 0.0;
  double ny = 0.0;
  for (const auto& e : x) nx += e.second * e.second;
  for (const auto& e : y) ny += e.second * e.second;
  const double lhs = bilinear_form(alpha, x, y, sigma, w);
  return safe_ratio(lhs, std::sqrt(a2_constant(sigma, w, grid) * nx * ny));
}

namespace {

double top_singular_value(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd g = m.rows() < m.cols() ? Eigen::MatrixXd(m * m.transpose()) : Eigen::MatrixXd(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

double bilinear_norm_ratio(const DyadicGrid& grid, double alpha, const Weight& sigma, const Weight& w) {
  require_same_lattice(sigma, w, grid);
  std::vector<DyadicCube> rows;
  std::vector<DyadicCube> cols;
  for (const auto& q : grid.all_cubes()) {
    if (mass(sigma, q) > 0.0) rows.push_back(q);
    if (mass(w, q) > 0.0) cols.push_back(q);
  }
  if (std::min(rows.size(), cols.size()) > kMaxExactUnknowns) {
    throw std::length_error("bilinear norm: too many charged cubes");
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          bilinear_coefficient(rows[i], cols[j], alpha, sigma, w);
    }
  }
  return safe_ratio(top_singular_value(a), std::sqrt(a2_constant(sigma, w, grid)));
}

double averaging_norm_ratio(const Weight& sigma, const Weight& w, double r_scale, const DyadicGrid& grid) {
  require_same_lattice(sigma, w, grid);
  if (!(r_scale > 0.0)) throw std::domain_error("averaging scale must be positive");
  const auto& spec = grid.spec();
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    if (sigma[c] > 0.0) src.push_back(c);
    if (w[c] > 0.0) dst.push_back(c);
  }
  if (std::min(src.size(), dst.size()) > kMaxExactUnknowns) {
    throw std::length_error("averaging norm: too many charged cells");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dst.size()), static_cast<Eigen::Index>(src.size()));
  const double scale = std::pow(r_scale, -spec.dim);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const Point x = spec.cell_center(dst[i]);
    for (std::size_t j = 0; j < src.size(); ++j) {
      const Point y = spec.cell_center(src[j]);
      bool inside = true;
      for (int a = 0; a < spec.dim && inside; ++a) {
        inside = (x[a] - 0.5 * r_scale <= y[a]) && (y[a] < x[a] + 0.5 * r_scale);
      }
      if (inside) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            scale * std::sqrt(w[dst[i]] * sigma[src[j]]);
      }
    }
  }
  return safe_ratio(top_singular_value(m), std::sqrt(a2_constant(sigma, w, grid)));
}

double good_gain_ratio(const DyadicGrid& grid, const DyadicCube& r, const DyadicCube& k, const DyadicCube& s,
                       const GridFunction& f, const Weight& sigma, const Weight& w, const Transform& tr,
                       const Quadrature& quad) {
  require_same_lattice(sigma, w, grid);
  const auto& spec = grid.spec();
  if (!grid.contains(k, r) || !grid.contains(s, k)) throw std::domain_error("good-gain needs R ⊂ K ⊂ S");
  const double lr = r.side(spec);
  const double lk = k.side(spec);
  if (grid.boundary_distance(r, k) < std::pow(lr, grid.gamma()) * std::pow(lk, 1.0 - grid.gamma())) {
    throw std::domain_error("good-gain needs R deep inside K");
  }
  bool vanishes = true;
  s.for_each_cell(spec, [&](std::size_t c) { vanishes = vanishes && f[c] * sigma[c] == 0.0; });
  if (!vanishes) throw std::domain_error("good-gain needs f sigma to vanish on S");

  const double lhs = whitney_integral(r, atoms_of(f, sigma), tr, w, quad);
  const double p = poisson_avg(k, atoms_of(f.abs(), sigma), spec);
  return safe_ratio(lhs, lr / lk * p * p * mass(w, r));
}

double averaging_ratio(const GridFunction& f, const Weight& sigma, const Weight& w, double r_scale,
                       const DyadicGrid& grid) {
  require_same_lattice(sigma, w, grid);
  const auto& spec = grid.spec();
  double lhs = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] == 0.0) continue;
    const double a = avg_operator(f, sigma, r_scale, spec.cell_center(c));
    lhs += a * a * w[c];
  }
  return safe_ratio(std::sqrt(lhs), std::sqrt(a2_constant(sigma, w, grid)) * l2_norm(f, sigma));
}

double necessity_a2_ratio(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const Quadrature& quad) {
  require_same_lattice(sigma, w, grid);
  const auto& spec = grid.spec();
  if (quad.t_max() < 4.0 * spec.side * (1.0 - 1e-12)) throw std::domain_error("necessity ratio needs t_max >= 4 side");
  const auto sm = level_masses(sigma, grid);
  const auto wm = level_masses(w, grid);
  double best = 0.0;
  for (const auto& q : grid.all_cubes()) {
    const auto li = static_cast<std::size_t>(q.level());
    const double s = sm[li][q.level_slot()];
    const double wq = wm[li][q.level_slot()];
    if (s == 0.0 || wq == 0.0) continue;
    const double vol = q.volume(spec);
    const double num = s * s / (vol * vol) * wq;
    GridFunction ind(spec);
    q.for_each_cell(spec, [&](std::size_t c) { ind[c] = 1.0; });
    const double g = g_norm(ind, sigma, w, quad);
    best = std::max(best, safe_ratio(num, g * g));
  }
  // The cube attaining 𝒜₂ need not be dyadic.
  const auto wit = a2_witness(sigma, w, grid);
  if (wit.value > 0.0) {
    GridFunction ind(spec);
    double s = 0.0;
    double wq = 0.0;
    for (std::size_t c = 0; c < spec.cell_count(); ++c) {
      const auto p = spec.cell_coords(c);
      bool in = true;
      for (int a = 0; a < spec.dim; ++a) in = in && p[a] >= wit.lo[a] && p[a] < wit.lo[a] + wit.cells;
      if (!in) continue;
      ind[c] = 1.0;
      s += sigma[c];
      wq += w[c];
    }
    const double vol = std::pow(static_cast<double>(wit.cells) * spec.cell_side(), spec.dim);
    const double g = g_norm(ind, sigma, w, quad);
    best = std::max(best, safe_ratio(s * s / (vol * vol) * wq, g * g));
  }
  return best;
}

ConstantsReport compute_constants(const Weight& sigma, const Weight& w, const DyadicGrid& grid,
                                  const ConstantsOptions& options) {
  require_same_lattice(sigma, w, grid);
  const auto& spec = grid.spec();
  ConstantsReport rep;
  rep.spec = spec;
  rep.r = grid.r();
  rep.gamma = grid.gamma();
  rep.nodes_per_octave = options.nodes_per_octave;

  const auto quad = Quadrature(spec.t_min, spec.t_max, options.nodes_per_octave, spec.side);
  rep.a2 = a2_constant(sigma, w, grid);
  rep.testing = testing_constant(sigma, w, grid, quad);
  rep.pivotal = pivotal_constant(sigma, w, grid, options.pivotal);
  rep.n_const = std::sqrt(rep.a2) + rep.testing;
  rep.half_poisson = half_poisson_constant(sigma, w, grid);

  auto norm_of = [&](const Quadrature& q) {
    try {
      return operator_norm_exact(sigma, w, q).norm;
    } catch (const std::length_error&) {
      rep.g_exact = false;
      return operator_norm_power(sigma, w, q);
    }
  };
  rep.g = norm_of(quad);
  if (options.check_t_min_stability) {
    rep.g_half_tmin = norm_of(Quadrature(0.5 * spec.t_min, spec.t_max, options.nodes_per_octave, spec.side));
  } else {
    rep.g_half_tmin = rep.g;
  }
  return rep;
}

double pivotal_lemma_ratio(const ConstantsReport& report) { return safe_ratio(report.pivotal.value, report.n_const); }

double pivotal_lemma_ratio(const Weight& sigma, const Weight& w, const DyadicGrid& grid, const Quadrature& quad,
                           const PivotalOptions& options) {
  const double piv = pivotal_constant(sigma, w, grid, options).value;
  const double n = std::sqrt(a2_constant(sigma, w, grid)) + testing_constant(sigma, w, grid, quad);
  return safe_ratio(piv, n);
}

}  // namespace gw
