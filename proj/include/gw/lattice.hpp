// Finite atomic weights and functions on a dyadic lattice over a base cube.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gw {

using Point = std::array<double, 2>;
using CellIndex = std::array<std::int64_t, 2>;

/// Base cube Q0 = origin + [0, side)^n, refined `depth` times. Atoms live at
/// cell centers. [t_min, t_max] truncates every t-integral.
struct LatticeSpec {
  int dim = 1;
  Point origin{0.0, 0.0};
  double side = 1.0;
  int depth = 4;
  double t_min = 0.0;
  double t_max = 0.0;

  /// Fills the default truncation t_min = cell/4, t_max = 4 side.
  static LatticeSpec make(int dim, int depth, double side = 1.0, Point origin = {0.0, 0.0});

  void validate() const;  // throws std::invalid_argument

  std::int64_t cells_per_axis() const { return std::int64_t{1} << depth; }
  std::size_t cell_count() const;
  double cell_side() const { return side / static_cast<double>(cells_per_axis()); }

  CellIndex cell_coords(std::size_t flat) const;
  std::size_t flat_index(const CellIndex& c) const;
  Point cell_center(std::size_t flat) const;
  /// Cell containing p under the half-open convention, if p lies in Q0.
  std::optional<std::size_t> locate(const Point& p) const;

  bool operator==(const LatticeSpec&) const = default;
};

double distance(const Point& a, const Point& b, int dim);

class DyadicCube;

/// Nonnegative atomic measure, one atom per cell center.
class Weight {
 public:
  explicit Weight(LatticeSpec spec);
  Weight(LatticeSpec spec, std::vector<double> masses);

  static Weight lebesgue(const LatticeSpec& spec);
  static Weight zero(const LatticeSpec& spec) { return Weight(spec); }

  const LatticeSpec& spec() const { return spec_; }
  const std::vector<double>& masses() const { return masses_; }
  double operator[](std::size_t cell) const { return masses_[cell]; }
  std::size_t size() const { return masses_.size(); }
  double total() const;
  bool is_zero() const;

  Weight scaled(double factor) const;
  /// Restriction to the cells of a cube.
  Weight restricted(const DyadicCube& cube) const;

 private:
  LatticeSpec spec_;
  std::vector<double> masses_;
};

/// Real-valued function on lattice cells.
class GridFunction {
 public:
  explicit GridFunction(LatticeSpec spec, double fill = 0.0);
  GridFunction(LatticeSpec spec, std::vector<double> values);

  const LatticeSpec& spec() const { return spec_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }
  double& operator[](std::size_t cell) { return values_[cell]; }
  std::size_t size() const { return values_.size(); }

  GridFunction abs() const;

 private:
  LatticeSpec spec_;
  std::vector<double> values_;
};

/// The measure f·σ as a signed atomic measure (may be negative).
struct SignedAtoms {
  std::vector<Point> positions;
  std::vector<double> masses;
};

SignedAtoms atoms_of(const Weight& w);
SignedAtoms atoms_of(const GridFunction& f, const Weight& sigma);

double mass(const Weight& w, const DyadicCube& cube);
double integrate(const GridFunction& f, const Weight& w, const DyadicCube& cube);
double l2_norm(const GridFunction& f, const Weight& w);

/// Weight CSV: header `x1[,x2],mass`. Atoms snap to their containing cell and
/// accumulate. Throws std::runtime_error with the offending line number.
Weight read_weight_csv(std::istream& in, const LatticeSpec& spec);
Weight read_weight_csv(const std::string& path, const LatticeSpec& spec);
void write_weight_csv(std::ostream& out, const Weight& w);

}  // namespace gw
