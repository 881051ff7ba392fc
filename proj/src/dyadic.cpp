#include "gw/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace gw {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

double box_gap(const Box& a, const Box& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double g = std::max({0.0, a.lo[i] - b.hi[i], b.lo[i] - a.hi[i]});
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace

DyadicCube::DyadicCube(int dim, int depth, int level, CellIndex index, CellIndex start)
    : dim_(dim), depth_(depth), level_(level), index_(index), start_(start) {}

std::size_t DyadicCube::cell_count() const {
  return std::size_t{1} << (static_cast<unsigned>(dim_) * static_cast<unsigned>(depth_ - level_));
}

bool DyadicCube::contains_cell(const CellIndex& c) const {
  const std::int64_t n = universe();
  const std::int64_t ext = extent();
  for (int a = 0; a < dim_; ++a) {
    if (mod(c[a] - start_[a], n) >= ext) return false;
  }
  return true;
}

void DyadicCube::for_each_cell(const LatticeSpec& spec, const std::function<void(std::size_t)>& fn) const {
  const std::int64_t n = universe();
  const std::int64_t ext = extent();
  if (dim_ == 1) {
    for (std::int64_t i = 0; i < ext; ++i) fn(static_cast<std::size_t>(mod(start_[0] + i, n)));
    return;
  }
  for (std::int64_t j = 0; j < ext; ++j) {
    const std::int64_t y = mod(start_[1] + j, n);
    for (std::int64_t i = 0; i < ext; ++i) {
      fn(spec.flat_index({mod(start_[0] + i, n), y}));
    }
  }
}

std::vector<std::size_t> DyadicCube::cells(const LatticeSpec& spec) const {
  std::vector<std::size_t> out;
  out.reserve(cell_count());
  for_each_cell(spec, [&](std::size_t c) { out.push_back(c); });
  return out;
}

double DyadicCube::volume(const LatticeSpec& spec) const { return std::pow(side(spec), dim_); }

std::vector<Box> DyadicCube::boxes(const LatticeSpec& spec) const {
  const std::int64_t n = universe();
  const std::int64_t ext = extent();
  const double h = spec.cell_side();
  std::array<std::vector<std::pair<double, double>>, 2> pieces;
  for (int a = 0; a < dim_; ++a) {
    const double o = spec.origin[a];
    const std::int64_t s = start_[a];
    if (s + ext <= n) {
      pieces[a].push_back({o + s * h, o + (s + ext) * h});
    } else {
      pieces[a].push_back({o + s * h, o + n * h});
      pieces[a].push_back({o, o + (s + ext - n) * h});
    }
  }
  std::vector<Box> out;
  if (dim_ == 1) {
    for (auto [lo, hi] : pieces[0]) out.push_back({{lo, 0.0}, {hi, 0.0}});
    return out;
  }
  for (auto [ylo, yhi] : pieces[1]) {
    for (auto [xlo, xhi] : pieces[0]) out.push_back({{xlo, ylo}, {xhi, yhi}});
  }
  return out;
}

double DyadicCube::distance_to(const LatticeSpec& spec, const Point& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Box& b : boxes(spec)) best = std::min(best, box_gap(b, Box{p, p}, dim_));
  return best;
}

double DyadicCube::distance_to(const LatticeSpec& spec, const DyadicCube& other) const {
  double best = std::numeric_limits<double>::infinity();
  const auto mine = boxes(spec);
  for (const Box& b : other.boxes(spec)) {
    for (const Box& a : mine) best = std::min(best, box_gap(a, b, dim_));
  }
  return best;
}

std::size_t DyadicCube::level_slot() const {
  if (dim_ == 1) return static_cast<std::size_t>(index_[0]);
  return static_cast<std::size_t>(index_[0] + (index_[1] << level_));
}

DyadicGrid::DyadicGrid(LatticeSpec spec, std::vector<Shift> shifts, int r, double gamma)
    : spec_(spec), shifts_(std::move(shifts)), r_(r), gamma_(gamma) {
  spec_.validate();
  if (shifts_.size() != static_cast<std::size_t>(spec_.depth)) {
    throw std::invalid_argument("shift vector needs one entry per level 1..depth");
  }
  if (r_ < 2) throw std::invalid_argument("goodness parameter r must be at least 2");
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  for (const Shift& s : shifts_) {
    for (int a = 0; a < 2; ++a) {
      if (s[a] != 0 && s[a] != 1) throw std::invalid_argument("shift entries must be 0 or 1");
      if (a >= spec_.dim && s[a] != 0) throw std::invalid_argument("shift has entries beyond the dimension");
    }
  }
  const int d = spec_.depth;
  offsets_.assign(static_cast<std::size_t>(d + 1), CellIndex{0, 0});
  for (int j = d - 1; j >= 0; --j) {
    for (int a = 0; a < 2; ++a) {
      // β_{j+1} moves level-j cubes by 2^{-(j+1)} s_len = 2^{d-j-1} cells.
      offsets_[static_cast<std::size_t>(j)][a] =
          offsets_[static_cast<std::size_t>(j + 1)][a] +
          (std::int64_t{1} << (d - j - 1)) * shifts_[static_cast<std::size_t>(j)][a];
    }
  }
}

DyadicGrid DyadicGrid::standard(const LatticeSpec& spec, int r) {
  return standard(spec, r, default_gamma(spec.dim));
}

DyadicGrid DyadicGrid::standard(const LatticeSpec& spec, int r, double gamma) {
  return DyadicGrid(spec, std::vector<Shift>(static_cast<std::size_t>(spec.depth), Shift{0, 0}), r, gamma);
}

DyadicGrid DyadicGrid::random(const LatticeSpec& spec, int r, double gamma, std::mt19937_64& rng) {
  std::vector<Shift> shifts(static_cast<std::size_t>(spec.depth), Shift{0, 0});
  for (auto& s : shifts) {
    for (int a = 0; a < spec.dim; ++a) s[a] = static_cast<int>(rng() & 1u);
  }
  return DyadicGrid(spec, std::move(shifts), r, gamma);
}

int DyadicGrid::min_r_for_overlap(int dim, double gamma, double c) {
  const double lhs = 2.0 * c * std::sqrt(static_cast<double>(dim));
  for (int r = 2; r < 64; ++r) {
    if (lhs <= std::exp2(r * (1.0 - gamma) - 1.0)) return r;
  }
  throw std::invalid_argument("no admissible r below 64");
}

int DyadicGrid::default_r(int dim) { return min_r_for_overlap(dim, default_gamma(dim), 4.0 * dim); }

DyadicCube DyadicGrid::cube(int level, CellIndex index) const {
  if (level < 0 || level > spec_.depth) throw std::domain_error("cube level outside [0, depth]");
  const std::int64_t per_axis = std::int64_t{1} << level;
  const std::int64_t ext = std::int64_t{1} << (spec_.depth - level);
  const std::int64_t n = spec_.cells_per_axis();
  CellIndex start{0, 0};
  for (int a = 0; a < 2; ++a) {
    if (a >= spec_.dim) {
      if (index[a] != 0) throw std::domain_error("cube index has entries beyond the dimension");
      continue;
    }
    if (index[a] < 0 || index[a] >= per_axis) throw std::domain_error("cube index outside the universe");
    start[a] = mod(index[a] * ext + offset(level, a), n);
  }
  return DyadicCube(spec_.dim, spec_.depth, level, index, start);
}

DyadicCube DyadicGrid::containing(const CellIndex& cell, int level) const {
  if (level < 0 || level > spec_.depth) throw std::domain_error("cube level outside [0, depth]");
  const std::int64_t ext = std::int64_t{1} << (spec_.depth - level);
  const std::int64_t n = spec_.cells_per_axis();
  CellIndex index{0, 0};
  for (int a = 0; a < spec_.dim; ++a) index[a] = mod(cell[a] - offset(level, a), n) / ext;
  return cube(level, index);
}

std::vector<DyadicCube> DyadicGrid::children(const DyadicCube& q) const {
  if (q.level() >= spec_.depth) throw std::domain_error("bottom-level cube has no children");
  const std::int64_t half = q.extent() / 2;
  const std::int64_t n = spec_.cells_per_axis();
  std::vector<DyadicCube> out;
  const int count = 1 << spec_.dim;
  out.reserve(static_cast<std::size_t>(count));
  for (int e = 0; e < count; ++e) {
    CellIndex cell = q.start();
    for (int a = 0; a < spec_.dim; ++a) cell[a] = mod(cell[a] + ((e >> a) & 1) * half, n);
    out.push_back(containing(cell, q.level() + 1));
  }
  return out;
}

DyadicCube DyadicGrid::parent(const DyadicCube& q, int k) const {
  if (k < 0 || q.level() - k < 0) throw std::domain_error("ancestor above the top level");
  return containing(q.start(), q.level() - k);
}

std::vector<DyadicCube> DyadicGrid::level_cubes(int level) const {
  std::vector<DyadicCube> out;
  const std::int64_t per_axis = std::int64_t{1} << level;
  out.reserve(level_size(level));
  if (spec_.dim == 1) {
    for (std::int64_t i = 0; i < per_axis; ++i) out.push_back(cube(level, {i, 0}));
  } else {
    for (std::int64_t j = 0; j < per_axis; ++j) {
      for (std::int64_t i = 0; i < per_axis; ++i) out.push_back(cube(level, {i, j}));
    }
  }
  return out;
}

std::vector<DyadicCube> DyadicGrid::all_cubes() const {
  std::vector<DyadicCube> out;
  for (int j = 0; j <= spec_.depth; ++j) {
    auto lv = level_cubes(j);
    out.insert(out.end(), lv.begin(), lv.end());
  }
  return out;
}

bool DyadicGrid::contains(const DyadicCube& outer, const DyadicCube& inner) const {
  if (inner.level() < outer.level()) return false;
  return containing(inner.start(), outer.level()) == outer;
}

CellIndex DyadicGrid::relative_offset(const DyadicCube& inner, const DyadicCube& outer) const {
  const std::int64_t n = spec_.cells_per_axis();
  CellIndex rel{0, 0};
  for (int a = 0; a < spec_.dim; ++a) rel[a] = mod(inner.start()[a] - outer.start()[a], n);
  return rel;
}

double DyadicGrid::boundary_distance(const DyadicCube& inner, const DyadicCube& outer) const {
  const CellIndex rel = relative_offset(inner, outer);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int a = 0; a < spec_.dim; ++a) {
    best = std::min({best, rel[a], outer.extent() - rel[a] - inner.extent()});
  }
  return static_cast<double>(best) * spec_.cell_side();
}

bool DyadicGrid::is_good(const DyadicCube& q) const {
  const double lq = q.side(spec_);
  for (int m = q.level() - r_; m >= 0; --m) {
    const DyadicCube anc = parent(q, q.level() - m);
    const double threshold = std::pow(lq, gamma_) * std::pow(anc.side(spec_), 1.0 - gamma_);
    if (boundary_distance(q, anc) <= threshold) return false;
  }
  return true;
}

bool DyadicGrid::strongly_contained(const DyadicCube& j, const DyadicCube& i) const {
  return contains(i, j) && j.level() - i.level() >= r_;
}

WhitneyCollection DyadicGrid::whitney(const DyadicCube& i) const {
  WhitneyCollection wc;
  wc.parent = i;
  wc.parent_side = i.side(spec_);
  const double h = spec_.cell_side();
  const double li_part = std::pow(wc.parent_side, 1.0 - gamma_);
  std::function<void(const DyadicCube&)> visit = [&](const DyadicCube& k) {
    if (k.level() - i.level() >= r_) {
      const double lk = k.side(spec_);
      const double dist = boundary_distance(k, i);
      if (dist >= std::pow(lk, gamma_) * li_part) {
        WhitneyMember m;
        m.cube = k;
        m.side = lk;
        m.boundary_distance = dist;
        const CellIndex rel = relative_offset(k, i);
        for (int a = 0; a < spec_.dim; ++a) m.rel_lo[a] = static_cast<double>(rel[a]) * h;
        wc.members.push_back(m);
        return;
      }
    }
    if (k.level() < spec_.depth) {
      for (const DyadicCube& c : children(k)) visit(c);
    }
  };
  visit(i);
  return wc;
}

const WhitneyCollection& WhitneyCache::get(const DyadicCube& q) {
  const auto key = std::make_pair(q.level(), q.level_slot());
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, grid_->whitney(q)).first;
  return it->second;
}

namespace {

// Folds `score` over the members whose expanded box C·K covers each
// candidate point, and returns the maximum score.
int max_cover(const WhitneyCollection& collection, double c, int dim,
              const std::function<int(const std::vector<std::size_t>&)>& score) {
  const auto& ms = collection.members;
  if (ms.empty()) return 0;
  std::vector<Box> expanded;
  expanded.reserve(ms.size());
  for (const auto& m : ms) {
    Box b;
    for (int a = 0; a < dim; ++a) {
      const double center = m.rel_lo[a] + 0.5 * m.side;
      b.lo[a] = center - 0.5 * c * m.side;
      b.hi[a] = center + 0.5 * c * m.side;
    }
    expanded.push_back(b);
  }
  // Depth of half-open boxes is maximized at a point whose coordinates are
  // all lower corners.
  std::array<std::vector<double>, 2> cand;
  for (int a = 0; a < dim; ++a) {
    for (const Box& b : expanded) cand[a].push_back(b.lo[a]);
    std::sort(cand[a].begin(), cand[a].end());
    cand[a].erase(std::unique(cand[a].begin(), cand[a].end()), cand[a].end());
  }
  if (dim == 1) cand[1] = {0.0};
  int best = 0;
  std::vector<std::size_t> hits;
  for (double y : cand[1]) {
    for (double x : cand[0]) {
      const Point p{x, y};
      hits.clear();
      for (std::size_t k = 0; k < expanded.size(); ++k) {
        bool in = true;
        for (int a = 0; a < dim && in; ++a) in = expanded[k].lo[a] <= p[a] && p[a] < expanded[k].hi[a];
        if (in) hits.push_back(k);
      }
      best = std::max(best, score(hits));
    }
  }
  return best;
}

}  // namespace

int overlap_count(const WhitneyCollection& collection, double c, int dim) {
  return max_cover(collection, c, dim, [](const std::vector<std::size_t>& hits) { return static_cast<int>(hits.size()); });
}

int overlap_scales(const WhitneyCollection& collection, double c, int dim) {
  return max_cover(collection, c, dim, [&](const std::vector<std::size_t>& hits) {
    std::set<int> levels;
    for (auto k : hits) levels.insert(collection.members[k].cube.level());
    return static_cast<int>(levels.size());
  });
}

PiGoodEstimate estimate_pi_good(const GridParams& params, int level, CellIndex index, int trials,
                                std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("pi_good estimation needs at least 100 trials");
  double hits = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    const DyadicGrid grid = DyadicGrid::random(params.spec, params.r, params.gamma, rng);
    if (grid.is_good(grid.cube(level, index))) hits += 1.0;
  }
  PiGoodEstimate est;
  est.trials = trials;
  est.estimate = hits / trials;
  const double p = est.estimate;
  est.standard_error = std::sqrt(p * (1.0 - p) / (trials - 1));
  return est;
}

std::optional<double> pi_good_exact(const GridParams& params, int level, std::uint64_t max_configs) {
  const int bits = params.spec.dim * level;
  if (bits >= 63 || (std::uint64_t{1} << bits) > max_configs) return std::nullopt;
  const std::uint64_t total = std::uint64_t{1} << bits;
  std::uint64_t good = 0;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<DyadicGrid::Shift> shifts(static_cast<std::size_t>(params.spec.depth), DyadicGrid::Shift{0, 0});
    int b = 0;
    for (int j = 0; j < level; ++j) {
      for (int a = 0; a < params.spec.dim; ++a) shifts[static_cast<std::size_t>(j)][a] = static_cast<int>((code >> b++) & 1u);
    }
    const DyadicGrid grid(params.spec, std::move(shifts), params.r, params.gamma);
    if (grid.is_good(grid.cube(level, {0, 0}))) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(total);
}

}  // namespace gw
