// Run configuration, weight-pair corpus, experiment drivers and report
// emission behind the `gw` command line.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gw/constants.hpp"
#include "gw/dyadic.hpp"
#include "gw/lattice.hpp"
#include "gw/quadrature.hpp"
#include "gw/stopping.hpp"
#include "json.hpp"

namespace gw {

using Json = nlohmann::ordered_json;

struct RunConfig {
  LatticeSpec spec = LatticeSpec::make(1, 6);
  int r = 2;
  double gamma = 0.25;
  int nodes_per_octave = 16;
  StoppingParams stopping;
  PivotalOptions pivotal;
  std::vector<std::string> corpus_kinds{"lebesgue", "single-atom", "multi-atom", "cantor", "uniform"};
  int corpus_count = 30;
  int trials = 500;
  int lemma_samples = 200;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;  // 0: hardware concurrency
};

/// Reads the RunConfig fields from JSON. Absent fields keep their defaults;
/// gamma defaults to 1/(2(n+1)) for the chosen dimension. Throws
/// std::invalid_argument.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);
Json to_json(const RunConfig& config);

DyadicGrid standard_grid(const RunConfig& config);
Quadrature make_quadrature(const RunConfig& config);

/// A weight pair plus a test function, all on one lattice.
struct Instance {
  std::string id;
  std::string kind;
  Weight sigma;
  Weight w;
  GridFunction f;
};

const std::vector<std::string>& known_corpus_kinds();
Instance make_instance(const std::string& kind, const LatticeSpec& spec, std::uint64_t seed, int index);
/// corpus_count instances cycling through corpus_kinds; instance i draws
/// from seed_seq{seed, i}.
std::vector<Instance> generate_corpus(const RunConfig& config);
/// zero σ, zero w, and one shared unit atom.
std::vector<Instance> degenerate_corpus(const LatticeSpec& spec);

/// Middle-thirds Cantor function on [0, 1].
double cantor_cdf(double x);

Json to_json(const LatticeSpec& spec);
Json to_json(const ConstantsReport& report);
Json provenance(const LatticeSpec& spec, int r, double gamma);

struct EquivalenceRecord {
  std::string id;
  std::string kind;
  ConstantsReport report;
  double necessity = 0.0;  // necessity_a2_ratio
  double g_over_n = 0.0;
  double sqrt_a2_over_g = 0.0;
  double t_over_g = 0.0;
  double p_over_n = 0.0;
  bool testing_ok = true;  // 𝒯 ≤ 𝒢 (1 + 1e-3)
  bool a2_ok = true;       // 𝒜₂ ≤ C_nec 𝒢², filled after the corpus pass
};

struct EquivalenceSummary {
  int instances = 0;
  int defined = 0;  // records with 𝒩 > 0
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double spread = 0.0;  // max / min of 𝒢/𝒩
  double c_nec = 0.0;
  double c_piv = 0.0;
  bool testing_ok = true;
  bool a2_ok = true;
};

struct EquivalenceResult {
  std::vector<EquivalenceRecord> records;
  EquivalenceSummary summary;
  bool passed() const { return summary.testing_ok && summary.a2_ok; }
};

EquivalenceResult run_equivalence(const RunConfig& config, const std::vector<Instance>& corpus);
Json to_json(const EquivalenceResult& result, const RunConfig& config);
std::string to_csv(const EquivalenceResult& result);

struct IdentityResult {
  std::string id;
  double full = 0.0;      // strip integral over the Whitney t-range
  double estimate = 0.0;  // shift average of the π_good-weighted good sum
  double difference = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  int trials = 0;
  bool exact_pi = true;  // every π_good came from enumeration
  std::vector<double> pi_good;
};

/// Monte Carlo check of the good-Whitney averaging identity over
/// config.trials random shifts.
IdentityResult verify_identity(const Instance& instance, const RunConfig& config);
Json to_json(const IdentityResult& result);

struct LemmaResult {
  std::string name;
  double max_ratio = 0.0;
  std::string argmax;
  int samples = 0;
  double coarse_max = 0.0;   // same lemma one depth coarser
  double depth_delta = 0.0;  // |max - coarse| / max
  double bound = 0.0;        // hard bound when the lemma has one, else 0
  int violations = 0;
  std::string note;
};

const std::vector<std::string>& lemma_names();
/// Throws std::invalid_argument for an unknown lemma name.
LemmaResult run_lemma(const std::string& name, const RunConfig& config, bool with_stability = true);
std::vector<LemmaResult> run_lemmas(const RunConfig& config, const std::vector<std::string>& which,
                                    bool with_stability = true);
Json to_json(const std::vector<LemmaResult>& table);
std::string to_csv(const std::vector<LemmaResult>& table);

Json to_json(const StoppingTree& tree, const LatticeSpec& spec);
Json pi_good_report(const RunConfig& config);
Json grid_report(const DyadicGrid& grid);

/// Runs fn(i) for i in [0, n) on a small thread pool; results are written
/// by index so the outcome is independent of scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace gw
