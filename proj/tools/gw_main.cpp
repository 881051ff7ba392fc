// gw: command-line front end for the two-weight g-function toolkit.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gw/constants.hpp"
#include "gw/harness.hpp"
#include "gw/stopping.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAcceptance = 3;

struct Options {
  std::string config;
  std::string sigma;
  std::string w;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  bool json = false;
};

gw::RunConfig resolve(const Options& o) {
  gw::RunConfig c = o.config.empty() ? gw::RunConfig{} : gw::load_config(o.config);
  if (o.seed_set) c.seed = o.seed;
  if (!o.out.empty()) c.out = o.out;
  return c;
}

/// The pair from --sigma/--w, or corpus instance 0 when neither is given.
gw::Instance load_pair(const Options& o, const gw::RunConfig& c) {
  if (o.sigma.empty() != o.w.empty()) throw std::invalid_argument("--sigma and --w go together");
  if (o.sigma.empty()) {
    const auto& kind = c.corpus_kinds.empty() ? std::string("lebesgue") : c.corpus_kinds.front();
    return gw::make_instance(kind, c.spec, c.seed, 0);
  }
  auto inst = gw::make_instance("lebesgue", c.spec, c.seed, 0);
  inst.id = "input";
  inst.kind = "file";
  inst.sigma = gw::read_weight_csv(o.sigma, c.spec);
  inst.w = gw::read_weight_csv(o.w, c.spec);
  return inst;
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name);
  if (!out) throw std::runtime_error("cannot write " + name + " in " + dir);
  out << text;
}

void emit(const Options& o, const gw::RunConfig& c, const std::string& name, const gw::Json& j,
          const std::string& human) {
  const std::string text = j.dump(2) + "\n";
  write_file(c.out, name, text);
  if (o.json) {
    std::cout << text;
  } else {
    std::cout << human;
  }
}

int cmd_constants(const Options& o) {
  const auto c = resolve(o);
  const auto inst = load_pair(o, c);
  const auto grid = gw::standard_grid(c);
  gw::ConstantsOptions opts;
  opts.nodes_per_octave = c.nodes_per_octave;
  opts.pivotal = c.pivotal;
  opts.pivotal.seed = c.seed;
  const auto rep = gw::compute_constants(inst.sigma, inst.w, grid, opts);
  std::ostringstream h;
  h << "A2        " << rep.a2 << "\nT         " << rep.testing << "\nP         " << rep.pivotal.value << " ("
    << rep.pivotal.strategy << ")\nN         " << rep.n_const << "\nG         " << rep.g << "\nhalf-P    "
    << rep.half_poisson << "\n";
  emit(o, c, "constants.json", gw::to_json(rep), h.str());
  return 0;
}

int cmd_verify_identity(const Options& o, int fixtures) {
  const auto c = resolve(o);
  std::vector<gw::Instance> insts;
  if (!o.sigma.empty() || !o.w.empty()) {
    insts.push_back(load_pair(o, c));
  } else {
    auto cc = c;
    cc.corpus_count = fixtures;
    insts = gw::generate_corpus(cc);
  }
  if (c.trials < 100) throw std::invalid_argument("verify-identity needs at least 100 trials");
  gw::Json arr = gw::Json::array();
  std::ostringstream h;
  bool ok = true;
  std::vector<double> pi_good;
  for (const auto& inst : insts) {
    const auto r = gw::verify_identity(inst, c);
    pi_good = r.pi_good;
    ok = ok && std::fabs(r.z) <= 3.0;
    arr.push_back(gw::to_json(r));
    h << inst.id << "  full " << r.full << "  estimate " << r.estimate << "  z " << r.z << "\n";
  }
  std::vector<int> empty_levels;
  for (std::size_t l = 0; l < pi_good.size(); ++l) {
    if (pi_good[l] == 0.0) empty_levels.push_back(static_cast<int>(l));
  }
  if (!empty_levels.empty()) {
    std::cerr << "gw: no cube is good at " << empty_levels.size() << " of " << pi_good.size()
              << " levels (pi_good = 0 from level " << empty_levels.front() << "); the identity needs r >= "
              << gw::DyadicGrid::default_r(c.spec.dim) << " at gamma = " << c.gamma << "\n";
  }
  gw::Json j;
  j["trials"] = c.trials;
  j["results"] = std::move(arr);
  j["passed"] = ok;
  emit(o, c, "verify_identity.json", j, h.str());
  return ok ? 0 : kExitAcceptance;
}

int cmd_equivalence(const Options& o, bool degenerate) {
  const auto c = resolve(o);
  const auto corpus = degenerate ? gw::degenerate_corpus(c.spec) : gw::generate_corpus(c);
  if (corpus.empty()) throw std::invalid_argument("equivalence needs a nonempty corpus");
  const auto res = gw::run_equivalence(c, corpus);
  write_file(c.out, "equivalence.csv", gw::to_csv(res));
  const auto& s = res.summary;
  std::ostringstream h;
  h << "instances " << s.instances << " (defined " << s.defined << ")\nG/N min " << s.min_ratio << "  median "
    << s.median_ratio << "  max " << s.max_ratio << "  c2/c1 " << s.spread << "\nC_nec " << s.c_nec << "  C_piv "
    << s.c_piv << "\nT <= G(1+1e-3): " << (s.testing_ok ? "yes" : "NO") << "\nA2 <= C_nec G^2: "
    << (s.a2_ok ? "yes" : "NO") << "\n";
  emit(o, c, "equivalence.json", gw::to_json(res, c), h.str());
  return res.passed() ? 0 : kExitAcceptance;
}

int cmd_stopping(const Options& o) {
  const auto c = resolve(o);
  const auto inst = load_pair(o, c);
  const auto grid = gw::standard_grid(c);
  auto params = c.stopping;
  params.pivotal = gw::pivotal_constant(inst.sigma, inst.w, grid).value;
  const auto tree = gw::build_tree(inst.f, inst.sigma, inst.w, grid, grid.top(), params);
  gw::Json j = gw::to_json(tree, c.spec);
  j["quasi_orthogonality"] = gw::quasi_orthogonality_ratio(tree, inst.f, inst.sigma);
  const auto ctl = gw::control_by_tau(tree, grid, inst.f, inst.sigma);
  j["control"] = {{"eligible_max", ctl.eligible_max}, {"all_max", ctl.all_max}, {"bound", gw::control_bound(params)}};
  std::ostringstream h;
  h << "stopping cubes " << tree.nodes().size() << "  quasi " << j["quasi_orthogonality"].get<double>()
    << "  control " << ctl.eligible_max << " <= " << gw::control_bound(params) << "\n";
  emit(o, c, "stopping.json", j, h.str());
  return 0;
}

int cmd_lemmas(const Options& o, std::vector<std::string> which, bool stability) {
  const auto c = resolve(o);
  if (which.size() == 1 && which.front() == "all") which = gw::lemma_names();
  const auto table = gw::run_lemmas(c, which, stability);
  write_file(c.out, "lemmas.csv", gw::to_csv(table));
  int violations = 0;
  for (const auto& r : table) violations += r.violations;
  emit(o, c, "lemmas.json", gw::to_json(table), gw::to_csv(table));
  return violations == 0 ? 0 : kExitAcceptance;
}

int cmd_pi_good(const Options& o) {
  const auto c = resolve(o);
  const auto j = gw::pi_good_report(c);
  std::ostringstream h;
  for (const auto& e : j["levels"]) h << "level " << e["level"] << "  exact " << e["exact"] << "\n";
  emit(o, c, "pi_good.json", j, h.str());
  return 0;
}

int cmd_grid(const Options& o, bool random) {
  const auto c = resolve(o);
  std::mt19937_64 rng(c.seed);
  const auto grid = random ? gw::DyadicGrid::random(c.spec, c.r, c.gamma, rng) : gw::standard_grid(c);
  const auto j = gw::grid_report(grid);
  std::ostringstream h;
  int good = 0;
  for (const auto& q : j["cubes"]) good += q["good"].get<bool>() ? 1 : 0;
  h << "cubes " << j["cubes"].size() << "  good " << good << "\n";
  emit(o, c, "grid.json", j, h.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-weight g-function toolkit"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "RunConfig JSON file");
  app.add_option("--sigma", o.sigma, "sigma weight CSV");
  app.add_option("--w", o.w, "w weight CSV");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { o.seed = s, o.seed_set = true; }, "random seed");
  app.add_option("--out", o.out, "directory for JSON and CSV reports");
  app.add_flag("--json", o.json, "print JSON to stdout");

  auto* constants = app.add_subcommand("constants", "A2, testing, pivotal, G and half-Poisson for one pair");
  int fixtures = 5;
  auto* identity = app.add_subcommand("verify-identity", "Monte Carlo check of the good-Whitney averaging identity");
  identity->add_option("--fixtures", fixtures, "corpus instances to check")->check(CLI::PositiveNumber);
  bool degenerate = false;
  auto* equivalence = app.add_subcommand("equivalence", "constants and ratios over the corpus");
  equivalence->add_flag("--degenerate", degenerate, "use the zero-sigma / zero-w / shared-atom fixtures");
  auto* stopping = app.add_subcommand("stopping", "stopping tree for one pair");
  std::vector<std::string> which;
  bool no_stability = false;
  auto* lemmas = app.add_subcommand("lemmas", "corpus constants for the auxiliary lemmas");
  lemmas->add_option("which", which, "lemma names, or 'all'");
  lemmas->add_flag("--no-stability", no_stability, "skip the one-depth-coarser rerun");
  auto* pi_good = app.add_subcommand("pi-good", "probability that a shifted cube is good, per level");
  bool random_grid = false;
  auto* grid = app.add_subcommand("grid", "dump the cubes of a grid with their goodness");
  grid->add_flag("--random", random_grid, "draw the shifts from --seed");

  for (auto* sub : {constants, identity, equivalence, stopping, lemmas, pi_good, grid}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (*constants) return cmd_constants(o);
    if (*identity) return cmd_verify_identity(o, fixtures);
    if (*equivalence) return cmd_equivalence(o, degenerate);
    if (*stopping) return cmd_stopping(o);
    if (*lemmas) return cmd_lemmas(o, which, !no_stability);
    if (*pi_good) return cmd_pi_good(o);
    if (*grid) return cmd_grid(o, random_grid);
  } catch (const std::invalid_argument& e) {
    std::cerr << "gw: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "gw: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "gw: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "gw: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
