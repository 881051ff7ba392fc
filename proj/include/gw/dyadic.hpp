// Shifted dyadic grids over the lattice universe: navigation, goodness,
// strong containment and Whitney collections.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "gw/lattice.hpp"

namespace gw {

struct Box {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
};

/// A cube of some DyadicGrid, resolved to lattice cells. `start` is the
/// first cell along each axis; the cube covers `extent` cells per axis
/// counted periodically, so a shifted cube may wrap around the universe.
class DyadicCube {
 public:
  DyadicCube() = default;
  DyadicCube(int dim, int depth, int level, CellIndex index, CellIndex start);

  int dim() const { return dim_; }
  int level() const { return level_; }
  const CellIndex& index() const { return index_; }
  const CellIndex& start() const { return start_; }
  std::int64_t extent() const { return std::int64_t{1} << (depth_ - level_); }
  std::int64_t universe() const { return std::int64_t{1} << depth_; }
  std::size_t cell_count() const;

  bool contains_cell(const CellIndex& c) const;
  bool contains_cell(const LatticeSpec& spec, std::size_t flat) const {
    return contains_cell(spec.cell_coords(flat));
  }
  void for_each_cell(const LatticeSpec& spec, const std::function<void(std::size_t)>& fn) const;
  std::vector<std::size_t> cells(const LatticeSpec& spec) const;

  double side(const LatticeSpec& spec) const { return spec.side / static_cast<double>(std::int64_t{1} << level_); }
  double volume(const LatticeSpec& spec) const;
  /// Closed boxes (real coordinates) whose union is the cube; one box
  /// unless the cube wraps.
  std::vector<Box> boxes(const LatticeSpec& spec) const;
  double distance_to(const LatticeSpec& spec, const Point& p) const;
  double distance_to(const LatticeSpec& spec, const DyadicCube& other) const;

  /// Flat index among the cubes of the same level.
  std::size_t level_slot() const;

  friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
    return a.level_ == b.level_ && a.index_ == b.index_ && a.start_ == b.start_;
  }

 private:
  int dim_ = 1;
  int depth_ = 0;
  int level_ = 0;
  CellIndex index_{0, 0};
  CellIndex start_{0, 0};
};

struct WhitneyMember {
  DyadicCube cube;
  double side = 0.0;
  double boundary_distance = 0.0;
  Point rel_lo{0.0, 0.0};  // corner relative to the parent's corner
};

struct WhitneyCollection {
  DyadicCube parent;
  double parent_side = 0.0;
  std::vector<WhitneyMember> members;
};

/// Shift vector β = (β_1..β_d), β_j ∈ {0,1}^n, plus goodness parameters.
class DyadicGrid {
 public:
  using Shift = std::array<int, 2>;

  DyadicGrid(LatticeSpec spec, std::vector<Shift> shifts, int r, double gamma);
  static DyadicGrid standard(const LatticeSpec& spec, int r);
  static DyadicGrid standard(const LatticeSpec& spec, int r, double gamma);
  static DyadicGrid random(const LatticeSpec& spec, int r, double gamma, std::mt19937_64& rng);

  static double default_gamma(int dim) { return 1.0 / (2.0 * (dim + 1)); }
  /// Smallest r with 2 C sqrt(n) <= 2^{r(1-γ)-1}.
  static int min_r_for_overlap(int dim, double gamma, double c);
  /// Default r: the overlap condition with C = 4n.
  static int default_r(int dim);

  const LatticeSpec& spec() const { return spec_; }
  const std::vector<Shift>& shifts() const { return shifts_; }
  int r() const { return r_; }
  double gamma() const { return gamma_; }
  int depth() const { return spec_.depth; }

  DyadicCube cube(int level, CellIndex index) const;
  DyadicCube top() const { return cube(0, {0, 0}); }
  DyadicCube containing(const CellIndex& cell, int level) const;
  DyadicCube containing(std::size_t flat_cell, int level) const {
    return containing(spec_.cell_coords(flat_cell), level);
  }
  std::vector<DyadicCube> children(const DyadicCube& q) const;
  DyadicCube parent(const DyadicCube& q, int k = 1) const;
  std::vector<DyadicCube> level_cubes(int level) const;
  std::vector<DyadicCube> all_cubes() const;
  std::size_t level_size(int level) const { return std::size_t{1} << (spec_.dim * level); }

  bool contains(const DyadicCube& outer, const DyadicCube& inner) const;
  /// dist(inner, ∂outer); requires inner ⊂ outer.
  double boundary_distance(const DyadicCube& inner, const DyadicCube& outer) const;
  /// inner's corner relative to outer's corner, in cells; requires inner ⊂ outer.
  CellIndex relative_offset(const DyadicCube& inner, const DyadicCube& outer) const;

  bool is_good(const DyadicCube& q) const;
  bool strongly_contained(const DyadicCube& j, const DyadicCube& i) const;
  WhitneyCollection whitney(const DyadicCube& i) const;

 private:
  std::int64_t offset(int level, int axis) const { return offsets_[static_cast<std::size_t>(level)][static_cast<std::size_t>(axis)]; }

  LatticeSpec spec_;
  std::vector<Shift> shifts_;
  std::vector<CellIndex> offsets_;  // per level, in cells
  int r_;
  double gamma_;
};

/// Caches Whitney collections of one grid by cube.
class WhitneyCache {
 public:
  explicit WhitneyCache(const DyadicGrid& grid) : grid_(&grid) {}
  const WhitneyCollection& get(const DyadicCube& q);

 private:
  const DyadicGrid* grid_;
  std::map<std::pair<int, std::size_t>, WhitneyCollection> cache_;
};

/// Maximum number of expanded members C·K covering a common point.
int overlap_count(const WhitneyCollection& collection, double c, int dim);
/// Maximum number of distinct member side lengths among the C·K covering a
/// common point.
int overlap_scales(const WhitneyCollection& collection, double c, int dim);

struct GridParams {
  LatticeSpec spec;
  int r = 2;
  double gamma = 0.25;
};

struct PiGoodEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  int trials = 0;
};

/// Monte Carlo probability that the shifted base cube (level, index) is good.
PiGoodEstimate estimate_pi_good(const GridParams& params, int level, CellIndex index, int trials,
                                std::uint64_t seed);
/// Exact truncated-model probability, enumerating the shift bits of levels
/// 1..level. Returns nullopt when more than `max_configs` configurations.
std::optional<double> pi_good_exact(const GridParams& params, int level,
                                    std::uint64_t max_configs = std::uint64_t{1} << 20);

}  // namespace gw
