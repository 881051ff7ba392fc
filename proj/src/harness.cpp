#include "gw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gw/gfun.hpp"
#include "gw/kernels.hpp"
#include "gw/transform.hpp"

namespace gw {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

PivotalOptions::Strategy strategy_from(const std::string& s) {
  if (s == "exact") return PivotalOptions::Strategy::Exact;
  if (s == "enumerate") return PivotalOptions::Strategy::Enumerate;
  if (s == "greedy") return PivotalOptions::Strategy::Greedy;
  if (s == "sampled") return PivotalOptions::Strategy::Sampled;
  throw std::invalid_argument("unknown pivotal strategy: " + s);
}

double ratio_or_zero(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int k = 0; k < workers; ++k) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Configuration

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  try {
    if (j.contains("lattice")) {
      const auto& l = j["lattice"];
      Point origin{0.0, 0.0};
      if (l.contains("origin")) {
        const auto& o = l["origin"];
        for (std::size_t a = 0; a < std::min<std::size_t>(2, o.size()); ++a) origin[a] = o[a].get<double>();
      }
      c.spec = LatticeSpec::make(l.value("dim", 1), l.value("depth", 6), l.value("side", 1.0), origin);
      if (l.contains("t_min")) c.spec.t_min = l["t_min"].get<double>();
      if (l.contains("t_max")) c.spec.t_max = l["t_max"].get<double>();
    }
    c.spec.validate();
    c.gamma = DyadicGrid::default_gamma(c.spec.dim);
    if (j.contains("grid")) {
      c.r = j["grid"].value("r", c.r);
      c.gamma = j["grid"].value("gamma", c.gamma);
    }
    if (c.r < 2) throw std::invalid_argument("grid.r must be at least 2");
    if (!(c.gamma > 0.0) || !(c.gamma < 1.0)) throw std::invalid_argument("grid.gamma must lie in (0, 1)");
    if (j.contains("quad")) c.nodes_per_octave = j["quad"].value("nodes_per_octave", c.nodes_per_octave);
    if (c.nodes_per_octave < 1) throw std::invalid_argument("quad.nodes_per_octave must be positive");
    if (j.contains("stopping")) {
      const auto& s = j["stopping"];
      c.stopping.energy_multiplier = s.value("energy_multiplier", c.stopping.energy_multiplier);
      c.stopping.tau_multiplier = s.value("tau_multiplier", c.stopping.tau_multiplier);
      c.stopping.c0 = s.value("c0", c.stopping.c0);
    }
    if (j.contains("pivotal")) {
      const auto& p = j["pivotal"];
      c.pivotal.strategy = strategy_from(p.value("strategy", std::string("exact")));
      c.pivotal.samples = p.value("samples", c.pivotal.samples);
      c.pivotal.enumeration_budget = p.value("budget", c.pivotal.enumeration_budget);
    }
    if (j.contains("corpus")) {
      const auto& k = j["corpus"];
      if (k.contains("kinds")) c.corpus_kinds = k["kinds"].get<std::vector<std::string>>();
      c.corpus_count = k.value("count", c.corpus_count);
    }
    c.trials = j.value("trials", c.trials);
    c.lemma_samples = j.value("lemma_samples", c.lemma_samples);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  const auto& known = known_corpus_kinds();
  for (const auto& k : c.corpus_kinds) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw std::invalid_argument("config: unknown corpus kind " + k);
    }
  }
  if (c.corpus_count < 0 || c.trials < 0 || c.lemma_samples < 0) {
    throw std::invalid_argument("config: counts must be nonnegative");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

Json to_json(const LatticeSpec& spec) {
  Json j;
  j["dim"] = spec.dim;
  j["depth"] = spec.depth;
  j["side"] = spec.side;
  j["origin"] = Json::array({spec.origin[0], spec.origin[1]});
  j["t_min"] = spec.t_min;
  j["t_max"] = spec.t_max;
  return j;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["lattice"] = to_json(c.spec);
  j["grid"] = {{"r", c.r}, {"gamma", c.gamma}};
  j["quad"] = {{"nodes_per_octave", c.nodes_per_octave}};
  j["stopping"] = {{"energy_multiplier", c.stopping.energy_multiplier},
                   {"tau_multiplier", c.stopping.tau_multiplier},
                   {"c0", c.stopping.c0}};
  j["pivotal"] = {{"strategy", to_string(c.pivotal.strategy)},
                  {"samples", c.pivotal.samples},
                  {"budget", c.pivotal.enumeration_budget}};
  j["corpus"] = {{"kinds", c.corpus_kinds}, {"count", c.corpus_count}};
  j["trials"] = c.trials;
  j["lemma_samples"] = c.lemma_samples;
  j["seed"] = c.seed;
  return j;
}

DyadicGrid standard_grid(const RunConfig& config) { return DyadicGrid::standard(config.spec, config.r, config.gamma); }

Quadrature make_quadrature(const RunConfig& config) {
  return Quadrature(config.spec.t_min, config.spec.t_max, config.nodes_per_octave, config.spec.side);
}

// ---------------------------------------------------------------------------
// Corpus

const std::vector<std::string>& known_corpus_kinds() {
  static const std::vector<std::string> kinds{"lebesgue", "single-atom", "multi-atom", "cantor",
                                              "uniform",  "zero-sigma",  "zero-w",     "shared-atom"};
  return kinds;
}

double cantor_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double result = 0.0;
  double scale = 0.5;
  for (int i = 0; i < 60; ++i) {
    x *= 3.0;
    const double digit = std::floor(x);
    x -= digit;
    if (digit == 1.0) return result + scale;
    if (digit == 2.0) result += scale;
    scale *= 0.5;
  }
  return result;
}

namespace {

Weight cantor_weight(const LatticeSpec& spec, bool reflect) {
  const auto n = spec.cells_per_axis();
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(n);
    const double b = static_cast<double>(i + 1) / static_cast<double>(n);
    axis[static_cast<std::size_t>(i)] = reflect ? cantor_cdf(1.0 - a) - cantor_cdf(1.0 - b) : cantor_cdf(b) - cantor_cdf(a);
  }
  std::vector<double> m(spec.cell_count());
  for (std::size_t c = 0; c < m.size(); ++c) {
    const auto idx = spec.cell_coords(c);
    double v = axis[static_cast<std::size_t>(idx[0])];
    if (spec.dim == 2) v *= axis[static_cast<std::size_t>(idx[1])];
    m[c] = v;
  }
  return Weight(spec, std::move(m));
}

Weight atoms_weight(const LatticeSpec& spec, std::mt19937_64& rng, int count, double lo, double hi) {
  std::uniform_int_distribution<std::size_t> cell(0, spec.cell_count() - 1);
  std::uniform_real_distribution<double> mass(lo, hi);
  std::vector<double> m(spec.cell_count(), 0.0);
  for (int k = 0; k < count; ++k) {
    const auto c = cell(rng);
    m[c] += mass(rng);
  }
  return Weight(spec, std::move(m));
}

Weight uniform_weight(const LatticeSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double vol = std::pow(spec.cell_side(), spec.dim);
  std::vector<double> m(spec.cell_count());
  for (auto& v : m) v = u(rng) * vol;
  return Weight(spec, std::move(m));
}

}  // namespace

Instance make_instance(const std::string& kind, const LatticeSpec& spec, std::uint64_t seed, int index) {
  spec.validate();
  auto rng = seeded(seed, static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  Weight sigma(spec);
  Weight w(spec);
  if (kind == "lebesgue") {
    sigma = Weight::lebesgue(spec).scaled(scale(rng));
    w = Weight::lebesgue(spec).scaled(scale(rng));
  } else if (kind == "single-atom") {
    sigma = atoms_weight(spec, rng, 1, 0.5, 2.0);
    w = atoms_weight(spec, rng, 1, 0.5, 2.0);
  } else if (kind == "multi-atom") {
    std::uniform_int_distribution<int> count(2, 6);
    const int ks = count(rng);
    const int kw = count(rng);
    sigma = atoms_weight(spec, rng, ks, 0.1, 1.0);
    w = atoms_weight(spec, rng, kw, 0.1, 1.0);
  } else if (kind == "cantor") {
    sigma = cantor_weight(spec, false).scaled(scale(rng));
    const bool lebesgue_w = (rng() & 1u) != 0u;
    w = (lebesgue_w ? Weight::lebesgue(spec) : cantor_weight(spec, true)).scaled(scale(rng));
  } else if (kind == "uniform") {
    sigma = uniform_weight(spec, rng);
    w = uniform_weight(spec, rng);
  } else if (kind == "zero-sigma") {
    w = Weight::lebesgue(spec);
  } else if (kind == "zero-w") {
    sigma = Weight::lebesgue(spec);
  } else if (kind == "shared-atom") {
    std::vector<double> m(spec.cell_count(), 0.0);
    m[spec.cell_count() / 2] = 1.0;
    sigma = Weight(spec, m);
    w = Weight(spec, m);
  } else {
    throw std::invalid_argument("unknown corpus kind: " + kind);
  }
  GridFunction f(spec);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = u(rng);
  std::ostringstream id;
  id << kind << '-' << std::setw(3) << std::setfill('0') << index;
  return Instance{id.str(), kind, std::move(sigma), std::move(w), std::move(f)};
}

std::vector<Instance> generate_corpus(const RunConfig& config) {
  std::vector<Instance> out;
  if (config.corpus_kinds.empty()) return out;
  for (int i = 0; i < config.corpus_count; ++i) {
    const auto& kind = config.corpus_kinds[static_cast<std::size_t>(i) % config.corpus_kinds.size()];
    out.push_back(make_instance(kind, config.spec, config.seed, i));
  }
  return out;
}

std::vector<Instance> degenerate_corpus(const LatticeSpec& spec) {
  return {make_instance("zero-sigma", spec, 0, 0), make_instance("zero-w", spec, 0, 1),
          make_instance("shared-atom", spec, 0, 2)};
}

// ---------------------------------------------------------------------------
// Constants reports

Json provenance(const LatticeSpec& spec, int r, double gamma) {
  Json j;
  j["lattice"] = to_json(spec);
  j["grid"] = {{"r", r}, {"gamma", gamma}, {"shifts", "standard"}};
  j["t_range"] = Json::array({spec.t_min, spec.t_max});
  j["poisson_average"] = "l(K) / (l(K) + dist(y, K))^(n+1)";
  j["goodness"] = "finite periodic universe; ancestors at levels <= j - r";
  j["semantics"] = "discrete truncated quantities on the lattice, not continuum constants";
  return j;
}

Json to_json(const ConstantsReport& r) {
  Json j;
  j["a2"] = r.a2;
  j["sqrt_a2"] = std::sqrt(r.a2);
  j["testing"] = r.testing;
  j["pivotal"] = {{"value", r.pivotal.value}, {"strategy", r.pivotal.strategy}};
  j["n"] = r.n_const;
  j["g"] = r.g;
  j["g_method"] = r.g_exact ? "eigensolve" : "power-iteration";
  j["g_half_tmin"] = r.g_half_tmin;
  const double drift = r.g > 0.0 ? std::fabs(r.g_half_tmin - r.g) / r.g : 0.0;
  j["g_tmin_drift"] = drift;
  j["g_tmin_stable"] = drift <= 1e-2;
  j["half_poisson"] = r.half_poisson;
  j["quad"] = {{"nodes_per_octave", r.nodes_per_octave}};
  j["provenance"] = provenance(r.spec, r.r, r.gamma);
  return j;
}

// ---------------------------------------------------------------------------
// Equivalence sweep

EquivalenceResult run_equivalence(const RunConfig& config, const std::vector<Instance>& corpus) {
  EquivalenceResult res;
  res.records.resize(corpus.size());
  ConstantsOptions opts;
  opts.nodes_per_octave = config.nodes_per_octave;
  opts.pivotal = config.pivotal;
  opts.pivotal.seed = config.seed;
  parallel_for(static_cast<int>(corpus.size()), config.threads, [&](int i) {
    const auto& inst = corpus[static_cast<std::size_t>(i)];
    const auto grid = DyadicGrid::standard(inst.sigma.spec(), config.r, config.gamma);
    const auto quad = Quadrature(inst.sigma.spec().t_min, inst.sigma.spec().t_max, config.nodes_per_octave,
                                 inst.sigma.spec().side);
    EquivalenceRecord rec;
    rec.id = inst.id;
    rec.kind = inst.kind;
    rec.report = compute_constants(inst.sigma, inst.w, grid, opts);
    rec.necessity = necessity_a2_ratio(inst.sigma, inst.w, grid, quad);
    const auto& rep = rec.report;
    rec.g_over_n = ratio_or_zero(rep.g, rep.n_const);
    rec.sqrt_a2_over_g = ratio_or_zero(std::sqrt(rep.a2), rep.g);
    rec.t_over_g = ratio_or_zero(rep.testing, rep.g);
    rec.p_over_n = pivotal_lemma_ratio(rep);
    rec.testing_ok = rep.testing <= rep.g * (1.0 + 1e-3);
    res.records[static_cast<std::size_t>(i)] = std::move(rec);
  });

  auto& s = res.summary;
  s.instances = static_cast<int>(res.records.size());
  std::vector<double> ratios;
  for (const auto& r : res.records) {
    s.c_nec = std::max(s.c_nec, r.necessity);
    s.c_piv = std::max(s.c_piv, r.p_over_n);
    s.testing_ok = s.testing_ok && r.testing_ok;
    if (r.report.n_const > 0.0) ratios.push_back(r.g_over_n);
  }
  for (auto& r : res.records) {
    r.a2_ok = r.report.a2 <= s.c_nec * r.report.g * r.report.g * (1.0 + 1e-9);
    s.a2_ok = s.a2_ok && r.a2_ok;
  }
  s.defined = static_cast<int>(ratios.size());
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    s.min_ratio = ratios.front();
    s.max_ratio = ratios.back();
    const std::size_t m = ratios.size() / 2;
    s.median_ratio = ratios.size() % 2 == 1 ? ratios[m] : 0.5 * (ratios[m - 1] + ratios[m]);
    s.spread = ratio_or_zero(s.max_ratio, s.min_ratio);
  }
  return res;
}

Json to_json(const EquivalenceResult& result, const RunConfig& config) {
  Json j;
  j["config"] = to_json(config);
  Json recs = Json::array();
  for (const auto& r : result.records) {
    Json e;
    e["id"] = r.id;
    e["kind"] = r.kind;
    e["constants"] = to_json(r.report);
    e["constants"].erase("provenance");
    e["necessity_ratio"] = r.necessity;
    e["ratios"] = {{"g_over_n", r.g_over_n},
                   {"sqrt_a2_over_g", r.sqrt_a2_over_g},
                   {"testing_over_g", r.t_over_g},
                   {"pivotal_over_n", r.p_over_n}};
    e["checks"] = {{"testing_le_g", r.testing_ok}, {"a2_le_cnec_g2", r.a2_ok}};
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  const auto& s = result.summary;
  j["summary"] = {{"instances", s.instances},
                  {"defined", s.defined},
                  {"g_over_n_min", s.min_ratio},
                  {"g_over_n_max", s.max_ratio},
                  {"g_over_n_median", s.median_ratio},
                  {"c2_over_c1", s.spread},
                  {"c_nec", s.c_nec},
                  {"c_piv", s.c_piv},
                  {"testing_le_g", s.testing_ok},
                  {"a2_le_cnec_g2", s.a2_ok},
                  {"passed", result.passed()}};
  j["provenance"] = provenance(config.spec, config.r, config.gamma);
  return j;
}

std::string to_csv(const EquivalenceResult& result) {
  std::ostringstream os;
  os << "id,kind,a2,testing,pivotal,n,g,half_poisson,g_over_n,sqrt_a2_over_g,testing_over_g,pivotal_over_n,"
        "necessity,testing_le_g,a2_le_cnec_g2\n";
  for (const auto& r : result.records) {
    const auto& p = r.report;
    os << r.id << ',' << r.kind << ',' << fmt(p.a2) << ',' << fmt(p.testing) << ',' << fmt(p.pivotal.value) << ','
       << fmt(p.n_const) << ',' << fmt(p.g) << ',' << fmt(p.half_poisson) << ',' << fmt(r.g_over_n) << ','
       << fmt(r.sqrt_a2_over_g) << ',' << fmt(r.t_over_g) << ',' << fmt(r.p_over_n) << ',' << fmt(r.necessity)
       << ',' << (r.testing_ok ? 1 : 0) << ',' << (r.a2_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Averaging identity over random shifts

IdentityResult verify_identity(const Instance& inst, const RunConfig& config) {
  const auto& spec = inst.sigma.spec();
  const auto quad = Quadrature(spec.t_min, spec.t_max, config.nodes_per_octave, spec.side);
  const auto tr = Transform::gradient();
  const auto mu = atoms_of(inst.f, inst.sigma);
  const auto [lo, hi] = whitney_t_range(spec);
  IdentityResult res;
  res.id = inst.id;
  res.trials = config.trials;
  res.full = strip_integral(mu, tr, inst.w, quad, lo, hi);

  // band[j][c] = w(c) ∫_{l_j/2 < t <= l_j} field² dt/t
  const int depth = spec.depth;
  std::vector<std::vector<double>> band(static_cast<std::size_t>(depth + 1), std::vector<double>(spec.cell_count(), 0.0));
  if (!mu.masses.empty()) {
    for (std::size_t c = 0; c < spec.cell_count(); ++c) {
      if (inst.w[c] == 0.0) continue;
      const Point x = spec.cell_center(c);
      for (std::size_t k = 0; k < quad.size(); ++k) {
        const double t = quad.nodes()[k];
        if (t <= lo || t > hi) continue;
        const int j = std::clamp(static_cast<int>(std::floor(std::log2(spec.side / t))), 0, depth);
        band[static_cast<std::size_t>(j)][c] += inst.w[c] * quad.weights()[k] * field_squared(mu, tr, x, t, spec);
      }
    }
  }

  const GridParams params{spec, config.r, config.gamma};
  for (int j = 0; j <= depth; ++j) {
    if (auto p = pi_good_exact(params, j)) {
      res.pi_good.push_back(*p);
    } else {
      res.exact_pi = false;
      res.pi_good.push_back(estimate_pi_good(params, j, {0, 0}, 20000, config.seed).estimate);
    }
  }

  auto rng = seeded(config.seed, 0x1d3a);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(std::max(config.trials, 0)));
  for (int trial = 0; trial < config.trials; ++trial) {
    const auto grid = DyadicGrid::random(spec, config.r, config.gamma, rng);
    double x = 0.0;
    for (int j = 0; j <= depth; ++j) {
      const double pj = res.pi_good[static_cast<std::size_t>(j)];
      if (pj == 0.0) continue;
      std::vector<char> good(grid.level_size(j), 0);
      for (const auto& q : grid.level_cubes(j)) good[q.level_slot()] = grid.is_good(q) ? 1 : 0;
      const auto& bj = band[static_cast<std::size_t>(j)];
      double level_sum = 0.0;
      for (std::size_t c = 0; c < bj.size(); ++c) {
        if (bj[c] != 0.0 && good[grid.containing(c, j).level_slot()]) level_sum += bj[c];
      }
      x += level_sum / pj;
    }
    xs.push_back(x);
  }
  if (!xs.empty()) {
    const double n = static_cast<double>(xs.size());
    res.estimate = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - res.estimate) * (x - res.estimate);
    res.standard_error = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    if (res.standard_error <= 1e-13 * std::fabs(res.estimate)) res.standard_error = 0.0;
  }
  res.difference = res.estimate - res.full;
  if (res.standard_error > 0.0) {
    res.z = res.difference / res.standard_error;
  } else {
    const bool equal = std::fabs(res.difference) <= 1e-10 * std::max(1e-300, std::fabs(res.full)) || res.difference == 0.0;
    res.z = equal ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return res;
}

Json to_json(const IdentityResult& r) {
  Json j;
  j["id"] = r.id;
  j["full"] = r.full;
  j["estimate"] = r.estimate;
  j["difference"] = r.difference;
  j["standard_error"] = r.standard_error;
  j["z"] = std::isfinite(r.z) ? Json(r.z) : Json("inf");
  j["trials"] = r.trials;
  j["pi_good"] = r.pi_good;
  j["pi_good_source"] = r.exact_pi ? "enumeration" : "monte-carlo";
  return j;
}

// ---------------------------------------------------------------------------
// Lemma checkers

namespace {

struct LemmaRun {
  double max_ratio = 0.0;
  std::string argmax;
  int samples = 0;
  double bound = 0.0;
  int violations = 0;
  std::string note;

  void offer(double v, const std::string& id) {
    ++samples;
    if (argmax.empty() || v > max_ratio) {
      max_ratio = std::max(max_ratio, v);
      argmax = id;
    }
  }
};

/// Evaluates fn on every corpus instance in parallel and folds in order.
LemmaRun over_corpus(const RunConfig& config,
                     const std::function<double(int, const Instance&, const DyadicGrid&)>& fn) {
  const auto corpus = generate_corpus(config);
  std::vector<double> values(corpus.size(), 0.0);
  parallel_for(static_cast<int>(corpus.size()), config.threads, [&](int i) {
    const auto& inst = corpus[static_cast<std::size_t>(i)];
    values[static_cast<std::size_t>(i)] = fn(i, inst, DyadicGrid::standard(inst.sigma.spec(), config.r, config.gamma));
  });
  LemmaRun run;
  for (std::size_t i = 0; i < corpus.size(); ++i) run.offer(values[i], corpus[i].id);
  return run;
}

DyadicCube random_subcube(const DyadicGrid& grid, const DyadicCube& q, int level, std::mt19937_64& rng) {
  DyadicCube cur = q;
  while (cur.level() < level) {
    const auto kids = grid.children(cur);
    cur = kids[static_cast<std::size_t>(rng() % kids.size())];
  }
  return cur;
}

LemmaRun lemma_orthogonality(const RunConfig& config) {
  const auto corpus = generate_corpus(config);
  std::vector<double> values(corpus.size(), 0.0);
  parallel_for(static_cast<int>(corpus.size()), config.threads, [&](int i) {
    auto rng = seeded(config.seed, 0x0a70 + static_cast<std::uint64_t>(i));
    const auto& inst = corpus[static_cast<std::size_t>(i)];
    const auto grid = DyadicGrid::random(inst.sigma.spec(), config.r, config.gamma, rng);
    const auto ex = expand(inst.f, inst.sigma, grid, 0);
    values[static_cast<std::size_t>(i)] = ex.pythagoras_residual(inst.f, inst.sigma);
  });
  LemmaRun run;
  run.bound = 1e-10;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    run.offer(values[i], corpus[i].id);
    if (!(values[i] < run.bound)) ++run.violations;
  }
  run.note = "relative Pythagoras residual over random shifts";
  return run;
}

std::vector<DyadicCube> subcubes(const DyadicGrid& grid, const DyadicCube& q, int level) {
  std::vector<DyadicCube> out{q};
  while (!out.empty() && out.front().level() < level) {
    std::vector<DyadicCube> next;
    for (const auto& c : out) {
      for (const auto& k : grid.children(c)) next.push_back(k);
    }
    out = std::move(next);
  }
  return out;
}

/// Subcubes R of K at `level` with dist(R, ∂K) ≥ l(R)^γ l(K)^{1-γ}.
std::vector<DyadicCube> deep_subcubes(const DyadicGrid& grid, const DyadicCube& k, int level) {
  const auto& spec = grid.spec();
  const double need = std::pow(spec.side * std::exp2(-level), grid.gamma()) * std::pow(k.side(spec), 1.0 - grid.gamma());
  std::vector<DyadicCube> out;
  for (const auto& r : subcubes(grid, k, level)) {
    if (grid.boundary_distance(r, k) >= need) out.push_back(r);
  }
  return out;
}

LemmaRun lemma_goodgain(const RunConfig& config) {
  const auto& spec = config.spec;
  const auto grid = standard_grid(config);
  const auto quad = make_quadrature(config);
  const auto tr = Transform::gradient();
  // Level pairs (l(K), l(R)) that admit a deep R; S sits at level >= 1 so
  // that f can live outside it.
  std::vector<std::pair<int, int>> pairs;
  for (int lk = 1; lk <= spec.depth; ++lk) {
    for (int lr = lk + 1; lr <= spec.depth; ++lr) {
      if (!deep_subcubes(grid, grid.cube(lk, {0, 0}), lr).empty()) pairs.emplace_back(lk, lr);
    }
  }
  if (pairs.empty()) throw std::invalid_argument("goodgain: lattice too shallow for an admissible R deep inside K");
  struct Sample {
    double base = 0.0;
    double halved = -1.0;
    std::string id;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(config.lemma_samples));
  const auto& kinds = config.corpus_kinds;
  parallel_for(config.lemma_samples, config.threads, [&](int i) {
    auto rng = seeded(config.seed, 0x9a1 + static_cast<std::uint64_t>(i));
    const auto kind = kinds.empty() ? std::string("uniform") : kinds[static_cast<std::size_t>(i) % kinds.size()];
    const auto inst = make_instance(kind, spec, config.seed, 100000 + i);
    const auto [lk, lr] = pairs[static_cast<std::size_t>(rng() % pairs.size())];
    const int ls = std::uniform_int_distribution<int>(1, lk)(rng);
    const auto s = random_subcube(grid, grid.top(), ls, rng);
    const auto k = random_subcube(grid, s, lk, rng);
    const auto deep = deep_subcubes(grid, k, lr);
    const auto r = deep[static_cast<std::size_t>(rng() % deep.size())];
    GridFunction f = inst.f;
    s.for_each_cell(spec, [&](std::size_t c) { f[c] = 0.0; });
    Sample out;
    out.id = inst.id + "/S" + std::to_string(ls) + "K" + std::to_string(lk) + "R" + std::to_string(lr);
    out.base = good_gain_ratio(grid, r, k, s, f, inst.sigma, inst.w, tr, quad);
    if (r.level() < spec.depth) {
      const auto child = random_subcube(grid, r, r.level() + 1, rng);
      out.halved = good_gain_ratio(grid, child, k, s, f, inst.sigma, inst.w, tr, quad);
    }
    samples[static_cast<std::size_t>(i)] = out;
  });
  LemmaRun run;
  for (const auto& s : samples) run.offer(s.base, s.id);
  double halved_max = 0.0;
  int halved_count = 0;
  for (const auto& s : samples) {
    if (s.halved < 0.0) continue;
    ++halved_count;
    halved_max = std::max(halved_max, s.halved);
    if (s.halved > run.max_ratio) ++run.violations;
  }
  run.bound = run.max_ratio;
  std::ostringstream note;
  note << "halved l(R)/l(K): " << halved_count << " configs, max ratio " << fmt(halved_max);
  run.note = note.str();
  return run;
}

LemmaRun lemma_bilinear(const RunConfig& config) {
  std::atomic<int> bad{0};
  auto run = over_corpus(config, [&](int i, const Instance& inst, const DyadicGrid& grid) {
    const double norm = bilinear_norm_ratio(grid, 1.0, inst.sigma, inst.w);
    auto rng = seeded(config.seed, 0xb111 + static_cast<std::uint64_t>(i));
    const auto cubes = grid.all_cubes();
    std::uniform_int_distribution<std::size_t> pick(0, cubes.size() - 1);
    std::uniform_real_distribution<double> coef(0.0, 1.0);
    for (int k = 0; k < 3; ++k) {
      CubeCoefficients x;
      CubeCoefficients y;
      for (int m = 0; m < 4; ++m) {
        x.emplace_back(cubes[pick(rng)], coef(rng));
        y.emplace_back(cubes[pick(rng)], coef(rng));
      }
      // Repeated cubes fold into one coefficient before the norm comparison.
      auto fold = [](CubeCoefficients v) {
        CubeCoefficients out;
        for (const auto& [q, a] : v) {
          auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == q; });
          if (it == out.end()) {
            out.emplace_back(q, a);
          } else {
            it->second += a;
          }
        }
        return out;
      };
      if (bilinear_form_ratio(grid, 1.0, fold(x), fold(y), inst.sigma, inst.w) > norm * (1.0 + 1e-9)) ++bad;
    }
    return norm;
  });
  run.violations = bad;
  run.note = "alpha = 1; top singular value of A over all cube pairs, plus sparse random coefficients";
  return run;
}

LemmaRun lemma_averaging(const RunConfig& config) {
  std::atomic<int> bad{0};
  auto run = over_corpus(config, [&](int, const Instance& inst, const DyadicGrid& grid) {
    const auto& spec = grid.spec();
    double best = 0.0;
    for (int k = 0; k <= spec.depth; ++k) {
      for (double factor : {1.0, 0.75}) {
        const double r = factor * spec.side * std::exp2(-k);
        const double norm = averaging_norm_ratio(inst.sigma, inst.w, r, grid);
        if (averaging_ratio(inst.f, inst.sigma, inst.w, r, grid) > norm * (1.0 + 1e-9)) ++bad;
        best = std::max(best, norm);
      }
    }
    return best;
  });
  run.violations = bad;
  run.note = "sup over f and r in {1, 3/4} * side * 2^-k";
  return run;
}

LemmaRun lemma_necessity(const RunConfig& config) {
  const auto quad = make_quadrature(config);
  auto run = over_corpus(config, [&](int, const Instance& inst, const DyadicGrid& grid) {
    return necessity_a2_ratio(inst.sigma, inst.w, grid, quad);
  });
  run.note = "max over cubes of (sigma(Q)/|Q|)^2 w(Q) / ||g(1_Q sigma)||^2";
  return run;
}

LemmaRun lemma_pivotal(const RunConfig& config) {
  const auto quad = make_quadrature(config);
  const bool enumerable = config.spec.dim == 1 && config.spec.depth <= 5;
  std::atomic<int> bad{0};
  std::vector<double> gaps;
  std::mutex gap_mutex;
  auto run = over_corpus(config, [&](int, const Instance& inst, const DyadicGrid& grid) {
    PivotalOptions exact;
    const double ratio = pivotal_lemma_ratio(inst.sigma, inst.w, grid, quad, exact);
    if (enumerable) {
      const double p_exact = pivotal_constant(inst.sigma, inst.w, grid, exact).value;
      PivotalOptions sampled = config.pivotal;
      sampled.strategy = PivotalOptions::Strategy::Sampled;
      sampled.seed = config.seed;
      const double p_sampled = pivotal_constant(inst.sigma, inst.w, grid, sampled).value;
      PivotalOptions brute;
      brute.strategy = PivotalOptions::Strategy::Enumerate;
      const double p_brute = pivotal_constant(inst.sigma, inst.w, grid, brute).value;
      if (p_sampled > p_exact * (1.0 + 1e-12)) ++bad;
      if (std::fabs(p_brute - p_exact) > 1e-12 * std::max(1.0, p_exact)) ++bad;
      std::lock_guard<std::mutex> lock(gap_mutex);
      gaps.push_back(p_exact - p_sampled);
    }
    return ratio;
  });
  run.violations = bad;
  std::ostringstream note;
  if (enumerable) {
    note << "sampled <= exact and enumeration == exact checked on " << gaps.size() << " instances; max gap "
         << fmt(gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end()));
  } else {
    note << "exact dynamic program only (enumeration needs n = 1, depth <= 5)";
  }
  run.note = note.str();
  return run;
}

StoppingTree corpus_tree(const Instance& inst, const DyadicGrid& grid, const RunConfig& config) {
  auto params = config.stopping;
  params.pivotal = pivotal_constant(inst.sigma, inst.w, grid).value;
  return build_tree(inst.f, inst.sigma, inst.w, grid, grid.top(), params);
}

LemmaRun lemma_quasi(const RunConfig& config) {
  auto run = over_corpus(config, [&](int, const Instance& inst, const DyadicGrid& grid) {
    return quasi_orthogonality_ratio(corpus_tree(inst, grid, config), inst.f, inst.sigma);
  });
  run.note = "sum_S tau(S)^2 sigma(S) / ||f||^2_sigma";
  return run;
}

LemmaRun lemma_control(const RunConfig& config) {
  std::vector<double> all(static_cast<std::size_t>(config.corpus_count), 0.0);
  const double bound = control_bound(config.stopping);
  auto run = over_corpus(config, [&](int i, const Instance& inst, const DyadicGrid& grid) {
    const auto tree = corpus_tree(inst, grid, config);
    const auto rep = control_by_tau(tree, grid, inst.f, inst.sigma);
    all[static_cast<std::size_t>(i)] = rep.all_max;
    return rep.eligible_max;
  });
  run.bound = bound;
  if (run.max_ratio > bound * (1.0 + 1e-12)) ++run.violations;
  std::ostringstream note;
  note << "bound max(theta1, theta2) = " << fmt(bound) << " over eligible cubes; unrestricted max "
       << fmt(all.empty() ? 0.0 : *std::max_element(all.begin(), all.end()));
  run.note = note.str();
  return run;
}

LemmaRun lemma_whitney_overlap(const RunConfig& config) {
  const auto& spec = config.spec;
  const double gamma = config.gamma;
  LemmaRun run;
  run.bound = 2.0 * (1.0 + 1.0 / gamma);
  std::ostringstream note;
  for (double c : {3.0, 4.0 * spec.dim}) {
    const int r = DyadicGrid::min_r_for_overlap(spec.dim, gamma, c);
    const auto grid = DyadicGrid::standard(spec, r, gamma);
    int worst = 0;
    int worst_scales = 0;
    std::size_t members = 0;
    for (const auto& q : grid.all_cubes()) {
      const auto wc = grid.whitney(q);
      members += wc.members.size();
      const int k = overlap_count(wc, c, spec.dim);
      worst = std::max(worst, k);
      worst_scales = std::max(worst_scales, overlap_scales(wc, c, spec.dim));
      std::ostringstream id;
      id << "C=" << c << " r=" << r << " level=" << q.level() << " slot=" << q.level_slot();
      run.offer(k, id.str());
    }
    if (worst_scales >= run.bound) ++run.violations;
    note << "C=" << c << " r=" << r << " max=" << worst << " distinct sizes=" << worst_scales
         << " members=" << members << "; ";
  }
  note << "violations count distinct sizes against the bound";
  run.note = note.str();
  return run;
}

LemmaRun dispatch(const std::string& name, const RunConfig& config) {
  if (name == "orthogonality") return lemma_orthogonality(config);
  if (name == "goodgain") return lemma_goodgain(config);
  if (name == "bilinear") return lemma_bilinear(config);
  if (name == "averaging") return lemma_averaging(config);
  if (name == "necessity") return lemma_necessity(config);
  if (name == "pivotal") return lemma_pivotal(config);
  if (name == "quasi") return lemma_quasi(config);
  if (name == "control") return lemma_control(config);
  if (name == "whitney-overlap") return lemma_whitney_overlap(config);
  throw std::invalid_argument("unknown lemma: " + name);
}

}  // namespace

const std::vector<std::string>& lemma_names() {
  static const std::vector<std::string> names{"orthogonality", "goodgain", "bilinear", "averaging", "necessity",
                                              "pivotal",       "quasi",    "control",  "whitney-overlap"};
  return names;
}

LemmaResult run_lemma(const std::string& name, const RunConfig& config, bool with_stability) {
  const auto& names = lemma_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) throw std::invalid_argument("unknown lemma: " + name);
  const auto run = dispatch(name, config);
  LemmaResult out;
  out.name = name;
  out.max_ratio = run.max_ratio;
  out.argmax = run.argmax;
  out.samples = run.samples;
  out.bound = run.bound;
  out.violations = run.violations;
  out.note = run.note;
  if (with_stability && config.spec.depth > 2) {
    RunConfig coarse = config;
    coarse.spec = LatticeSpec::make(config.spec.dim, config.spec.depth - 1, config.spec.side, config.spec.origin);
    try {
      const auto c = dispatch(name, coarse);
      out.coarse_max = c.max_ratio;
      out.depth_delta = out.max_ratio > 0.0 ? std::fabs(out.max_ratio - c.max_ratio) / out.max_ratio : 0.0;
    } catch (const std::invalid_argument& e) {
      out.note += out.note.empty() ? "" : "; ";
      out.note += std::string("no coarse rerun: ") + e.what();
    }
  }
  return out;
}

std::vector<LemmaResult> run_lemmas(const RunConfig& config, const std::vector<std::string>& which,
                                    bool with_stability) {
  const auto& names = lemma_names();
  for (const auto& w : which) {
    if (std::find(names.begin(), names.end(), w) == names.end()) throw std::invalid_argument("unknown lemma: " + w);
  }
  std::vector<LemmaResult> out;
  for (const auto& w : which) out.push_back(run_lemma(w, config, with_stability));
  return out;
}

Json to_json(const std::vector<LemmaResult>& table) {
  Json j = Json::array();
  for (const auto& r : table) {
    j.push_back({{"lemma", r.name},
                 {"max_ratio", r.max_ratio},
                 {"argmax", r.argmax},
                 {"samples", r.samples},
                 {"coarse_max", r.coarse_max},
                 {"depth_delta", r.depth_delta},
                 {"bound", r.bound},
                 {"violations", r.violations},
                 {"note", r.note}});
  }
  return j;
}

std::string to_csv(const std::vector<LemmaResult>& table) {
  std::ostringstream os;
  os << "lemma,max_ratio,argmax,samples,coarse_max,depth_delta,bound,violations\n";
  for (const auto& r : table) {
    os << r.name << ',' << fmt(r.max_ratio) << ',' << r.argmax << ',' << r.samples << ',' << fmt(r.coarse_max) << ','
       << fmt(r.depth_delta) << ',' << fmt(r.bound) << ',' << r.violations << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Structural dumps

Json to_json(const StoppingTree& tree, const LatticeSpec& spec) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    Json e;
    e["id"] = i;
    e["level"] = n.cube.level();
    e["index"] = Json::array({n.cube.index()[0], n.cube.index()[1]});
    e["start"] = Json::array({n.cube.start()[0], n.cube.start()[1]});
    e["side"] = n.cube.side(spec);
    e["tau"] = n.tau;
    e["trigger"] = to_string(n.trigger);
    e["parent"] = n.parent;
    e["children"] = n.children;
    nodes.push_back(std::move(e));
  }
  Json j;
  j["r"] = tree.r();
  j["params"] = {{"energy_multiplier", tree.params().energy_multiplier},
                 {"tau_multiplier", tree.params().tau_multiplier},
                 {"c0", tree.params().c0},
                 {"pivotal", tree.params().pivotal}};
  j["roots"] = tree.roots();
  j["nodes"] = std::move(nodes);
  return j;
}

Json pi_good_report(const RunConfig& config) {
  const GridParams params{config.spec, config.r, config.gamma};
  Json levels = Json::array();
  for (int j = 0; j <= config.spec.depth; ++j) {
    Json e;
    e["level"] = j;
    const auto exact = pi_good_exact(params, j);
    e["exact"] = exact ? Json(*exact) : Json(nullptr);
    if (config.trials >= 100) {
      const auto est = estimate_pi_good(params, j, {0, 0}, config.trials, config.seed);
      e["estimate"] = est.estimate;
      e["standard_error"] = est.standard_error;
    }
    levels.push_back(std::move(e));
  }
  Json j;
  j["lattice"] = to_json(config.spec);
  j["r"] = config.r;
  j["gamma"] = config.gamma;
  j["trials"] = config.trials;
  j["levels"] = std::move(levels);
  return j;
}

Json grid_report(const DyadicGrid& grid) {
  Json shifts = Json::array();
  for (const auto& s : grid.shifts()) shifts.push_back(Json::array({s[0], s[1]}));
  Json cubes = Json::array();
  for (const auto& q : grid.all_cubes()) {
    cubes.push_back({{"level", q.level()},
                     {"index", Json::array({q.index()[0], q.index()[1]})},
                     {"start", Json::array({q.start()[0], q.start()[1]})},
                     {"good", grid.is_good(q)}});
  }
  Json j;
  j["lattice"] = to_json(grid.spec());
  j["r"] = grid.r();
  j["gamma"] = grid.gamma();
  j["shifts"] = std::move(shifts);
  j["cubes"] = std::move(cubes);
  return j;
}

}  // namespace gw
