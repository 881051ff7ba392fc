#include "gw/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace gw {

double expectation(const GridFunction& f, const Weight& sigma, const DyadicCube& q) {
  const double m = mass(sigma, q);
  if (m == 0.0) return 0.0;
  return integrate(f, sigma, q) / m;
}

namespace {

MartingaleDifference difference(const GridFunction& f, const Weight& sigma, const DyadicGrid& grid,
                                const DyadicCube& q) {
  MartingaleDifference d;
  d.cube = q;
  d.children = grid.children(q);
  const double parent_mean = expectation(f, sigma, q);
  for (const DyadicCube& c : d.children) d.values.push_back(expectation(f, sigma, c) - parent_mean);
  return d;
}

}  // namespace

GridFunction MartingaleDifference::materialize(const LatticeSpec& spec) const {
  GridFunction g(spec);
  for (std::size_t i = 0; i < children.size(); ++i) {
    children[i].for_each_cell(spec, [&](std::size_t c) { g[c] = values[i]; });
  }
  return g;
}

double MartingaleDifference::norm_squared(const Weight& sigma) const {
  double s = 0.0;
  for (std::size_t i = 0; i < children.size(); ++i) s += values[i] * values[i] * mass(sigma, children[i]);
  return s;
}

GridFunction delta(const GridFunction& f, const Weight& sigma, const DyadicGrid& grid, const DyadicCube& q) {
  return difference(f, sigma, grid, q).materialize(sigma.spec());
}

GridFunction MartingaleExpansion::reconstruct(const LatticeSpec& spec) const {
  GridFunction g(spec);
  for (std::size_t i = 0; i < tops.size(); ++i) {
    tops[i].for_each_cell(spec, [&](std::size_t c) { g[c] += top_coefficients[i]; });
  }
  for (const auto& d : differences) {
    for (std::size_t i = 0; i < d.children.size(); ++i) {
      d.children[i].for_each_cell(spec, [&](std::size_t c) { g[c] += d.values[i]; });
    }
  }
  return g;
}

double MartingaleExpansion::pythagoras_residual(const GridFunction& f, const Weight& sigma) const {
  const double lhs = std::pow(l2_norm(f, sigma), 2);
  double rhs = 0.0;
  for (const auto& d : differences) rhs += d.norm_squared(sigma);
  for (std::size_t i = 0; i < tops.size(); ++i) rhs += top_coefficients[i] * top_coefficients[i] * mass(sigma, tops[i]);
  if (lhs == 0.0) return std::fabs(rhs);
  return std::fabs(lhs - rhs) / lhs;
}

MartingaleExpansion expand(const GridFunction& f, const Weight& sigma, const DyadicGrid& grid, int top_level) {
  if (top_level < 0 || top_level > grid.depth()) throw std::domain_error("expansion level outside the lattice");
  MartingaleExpansion ex;
  ex.top_level = top_level;
  for (const DyadicCube& q : grid.level_cubes(top_level)) {
    ex.tops.push_back(q);
    ex.top_coefficients.push_back(expectation(f, sigma, q));
  }
  for (int j = top_level; j < grid.depth(); ++j) {
    for (const DyadicCube& q : grid.level_cubes(j)) {
      if (mass(sigma, q) == 0.0) continue;  // Δ vanishes σ-a.e.
      ex.differences.push_back(difference(f, sigma, grid, q));
    }
  }
  const GridFunction rec = ex.reconstruct(sigma.spec());
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    if (sigma[c] > 0.0) ex.residual = std::max(ex.residual, std::fabs(rec[c] - f[c]));
  }
  return ex;
}

double inner_product(const GridFunction& g, const GridFunction& h, const Weight& sigma) {
  double s = 0.0;
  for (std::size_t c = 0; c < sigma.size(); ++c) s += g[c] * h[c] * sigma[c];
  return s;
}

}  // namespace gw
