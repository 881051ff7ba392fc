#include "gw/lattice.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gw/dyadic.hpp"

namespace gw {

LatticeSpec LatticeSpec::make(int dim, int depth, double side, Point origin) {
  LatticeSpec s;
  s.dim = dim;
  s.depth = depth;
  s.side = side;
  s.origin = origin;
  s.t_min = s.cell_side() / 4.0;
  s.t_max = 4.0 * side;
  s.validate();
  return s;
}

void LatticeSpec::validate() const {
  if (dim < 1 || dim > 2) throw std::invalid_argument("lattice dimension must be 1 or 2");
  if (depth < 1 || depth > 12) throw std::invalid_argument("lattice depth must lie in [1, 12]");
  if (!(side > 0.0) || !std::isfinite(side)) throw std::invalid_argument("lattice side must be positive");
  if (!(t_min > 0.0) || !(t_min < t_max)) throw std::invalid_argument("need 0 < t_min < t_max");
}

std::size_t LatticeSpec::cell_count() const {
  return std::size_t{1} << (static_cast<unsigned>(dim) * static_cast<unsigned>(depth));
}

CellIndex LatticeSpec::cell_coords(std::size_t flat) const {
  const auto n = static_cast<std::size_t>(cells_per_axis());
  if (dim == 1) return {static_cast<std::int64_t>(flat), 0};
  return {static_cast<std::int64_t>(flat % n), static_cast<std::int64_t>(flat / n)};
}

std::size_t LatticeSpec::flat_index(const CellIndex& c) const {
  if (dim == 1) return static_cast<std::size_t>(c[0]);
  return static_cast<std::size_t>(c[0] + c[1] * cells_per_axis());
}

Point LatticeSpec::cell_center(std::size_t flat) const {
  const CellIndex c = cell_coords(flat);
  const double h = cell_side();
  Point p{0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = origin[a] + (static_cast<double>(c[a]) + 0.5) * h;
  return p;
}

std::optional<std::size_t> LatticeSpec::locate(const Point& p) const {
  const double h = cell_side();
  CellIndex c{0, 0};
  for (int a = 0; a < dim; ++a) {
    const double u = (p[a] - origin[a]) / h;
    if (!(u >= 0.0)) return std::nullopt;
    const auto k = static_cast<std::int64_t>(std::floor(u));
    if (k >= cells_per_axis()) return std::nullopt;
    c[a] = k;
  }
  return flat_index(c);
}

double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Weight::Weight(LatticeSpec spec) : spec_(spec), masses_(spec.cell_count(), 0.0) {}

Weight::Weight(LatticeSpec spec, std::vector<double> masses) : spec_(spec), masses_(std::move(masses)) {
  if (masses_.size() != spec_.cell_count()) throw std::invalid_argument("weight size does not match lattice");
  for (double m : masses_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("weight masses must be finite and nonnegative");
  }
}

Weight Weight::lebesgue(const LatticeSpec& spec) {
  const double vol = std::pow(spec.cell_side(), spec.dim);
  return Weight(spec, std::vector<double>(spec.cell_count(), vol));
}

double Weight::total() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

bool Weight::is_zero() const {
  for (double m : masses_) {
    if (m != 0.0) return false;
  }
  return true;
}

Weight Weight::scaled(double factor) const {
  std::vector<double> m = masses_;
  for (double& x : m) x *= factor;
  return Weight(spec_, std::move(m));
}

Weight Weight::restricted(const DyadicCube& cube) const {
  std::vector<double> m(masses_.size(), 0.0);
  cube.for_each_cell(spec_, [&](std::size_t c) { m[c] = masses_[c]; });
  return Weight(spec_, std::move(m));
}

GridFunction::GridFunction(LatticeSpec spec, double fill) : spec_(spec), values_(spec.cell_count(), fill) {}

GridFunction::GridFunction(LatticeSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
  if (values_.size() != spec_.cell_count()) throw std::invalid_argument("function size does not match lattice");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
  }
}

GridFunction GridFunction::abs() const {
  std::vector<double> v = values_;
  for (double& x : v) x = std::fabs(x);
  return GridFunction(spec_, std::move(v));
}

SignedAtoms atoms_of(const Weight& w) {
  SignedAtoms a;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] == 0.0) continue;
    a.positions.push_back(w.spec().cell_center(c));
    a.masses.push_back(w[c]);
  }
  return a;
}

SignedAtoms atoms_of(const GridFunction& f, const Weight& sigma) {
  SignedAtoms a;
  for (std::size_t c = 0; c < sigma.size(); ++c) {
    const double m = f[c] * sigma[c];
    if (m == 0.0) continue;
    a.positions.push_back(sigma.spec().cell_center(c));
    a.masses.push_back(m);
  }
  return a;
}

namespace {

void check_cube(const LatticeSpec& spec, const DyadicCube& cube) {
  if (cube.level() < 0 || cube.level() > spec.depth || cube.universe() != spec.cells_per_axis() ||
      cube.dim() != spec.dim) {
    throw std::domain_error("cube lies outside the lattice universe");
  }
}

}  // namespace

double mass(const Weight& w, const DyadicCube& cube) {
  check_cube(w.spec(), cube);
  double s = 0.0;
  cube.for_each_cell(w.spec(), [&](std::size_t c) { s += w[c]; });
  return s;
}

double integrate(const GridFunction& f, const Weight& w, const DyadicCube& cube) {
  check_cube(w.spec(), cube);
  double s = 0.0;
  cube.for_each_cell(w.spec(), [&](std::size_t c) { s += f[c] * w[c]; });
  return s;
}

double l2_norm(const GridFunction& f, const Weight& w) {
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) s += f[c] * f[c] * w[c];
  return std::sqrt(s);
}

Weight read_weight_csv(std::istream& in, const LatticeSpec& spec) {
  std::vector<double> masses(spec.cell_count(), 0.0);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  const auto columns = static_cast<std::size_t>(spec.dim + 1);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("weight csv line " + std::to_string(line_no) + ": " + what);
    };
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != columns || fields.back().find("mass") == std::string::npos) {
        fail("expected header with " + std::to_string(columns) + " columns ending in 'mass'");
      }
      continue;
    }
    if (fields.size() != columns) fail("expected " + std::to_string(columns) + " fields");
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < columns; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(fields[i], &used);
        if (fields[i].find_first_not_of(" \t", used) != std::string::npos) fail("malformed number '" + fields[i] + "'");
      } catch (const std::logic_error&) {
        fail("malformed number '" + fields[i] + "'");
      }
    }
    const double m = v[columns - 1];
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument("weight csv line " + std::to_string(line_no) + ": negative or non-finite mass");
    }
    const auto cell = spec.locate({v[0], spec.dim == 2 ? v[1] : 0.0});
    if (!cell) fail("atom lies outside the base cube");
    masses[*cell] += m;
  }
  if (!header_seen) throw std::runtime_error("weight csv line 1: missing header");
  return Weight(spec, std::move(masses));
}

Weight read_weight_csv(const std::string& path, const LatticeSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weight file " + path);
  return read_weight_csv(in, spec);
}

void write_weight_csv(std::ostream& out, const Weight& w) {
  const auto& spec = w.spec();
  out << (spec.dim == 1 ? "x1,mass\n" : "x1,x2,mass\n");
  out.precision(17);
  for (std::size_t c = 0; c < w.size(); ++c) {
    const Point p = spec.cell_center(c);
    out << p[0] << ',';
    if (spec.dim == 2) out << p[1] << ',';
    out << w[c] << '\n';
  }
}

}  // namespace gw
