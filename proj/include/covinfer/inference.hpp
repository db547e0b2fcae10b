#ifndef COVINFER_INFERENCE_HPP
#define COVINFER_INFERENCE_HPP

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covinfer/interaction.hpp"
#include "covinfer/oracle.hpp"

namespace covinfer {

/// All evaluated configurations (stable ids = indices into universe) and,
/// per covered location, the ids of the configurations covering it. The
/// non-covering set is always derived, never stored.
struct CoverageMap {
  std::vector<Configuration> universe;
  std::map<std::string, std::set<std::size_t>> covered;

  std::set<std::string> locations() const;
  std::vector<Configuration> covering(const std::string& location) const;
  std::vector<Configuration> non_covering(const std::string& location) const;
};

struct InferenceParams {
  std::uint64_t seed = 0;
  int max_iterations = 100;  // safety valve; hitting it is reported as a warning
  /// Consecutive unchanged iterations required before the loop accepts the
  /// fix-point. Each batch probes only one mutated interaction, so a single
  /// quiet iteration is weak evidence of convergence; 1 stops at the first
  /// unchanged iteration.
  int stability_streak = 12;
  std::uint64_t implication_cap = kDefaultImplicationCap;
  bool include_default = true;
  int jobs = 1;  // concurrent oracle evaluations within one batch
};

struct IterationRecord {
  std::vector<Configuration> new_configs;
  /// Rendered conj/disj/conjdisj/disjconj per covered location (ascii style).
  std::map<std::string, std::array<std::string, 4>> tuple_digests;
  /// Result as it would stand if the loop stopped here (check + selStrongest
  /// against the data seen so far); drives convergence trajectories.
  std::map<std::string, FinalResult> provisional;
};

struct InferenceResult {
  ConfigSpace space;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::size_t configs_used = 0;
  std::map<std::string, FinalResult> interactions;
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

/// True iff the covered-location sets are equal and every location's four
/// candidate components are structurally equal.
bool fixpoint_reached(const CoverageMap& prev_cov,
                      const std::map<std::string, CandidateTuple>& prev_tuples,
                      const CoverageMap& cur_cov,
                      const std::map<std::string, CandidateTuple>& cur_tuples);

/// Mutations of one selected interaction core: the pool holds every conj
/// core, every non-covering core behind disj, and both auxiliary cores,
/// across locations; the longest wins with uniformly random tie-breaking.
/// For each constrained option and each value outside its set, emits one
/// configuration disagreeing there and agreeing (randomly within the sets)
/// everywhere else. Deduplicates against `existing` and within the batch;
/// falls back to one fresh unseen configuration, or none if the space is
/// exhausted.
///
/// When `explored` is given, cores already used as a mutation base are
/// passed over until every core in the pool has had a turn; the chosen core
/// is added to the set. Successive quiet iterations then probe distinct
/// interactions instead of re-rolling the same one.
std::vector<Configuration> gen_new_configs(const std::map<std::string, CandidateTuple>& tuples,
                                           const std::set<Configuration>& existing,
                                           const ConfigSpace& space, Rng& rng,
                                           std::set<SettingSet>* explored = nullptr);

/// The iterative loop: seed with a covering array (plus the default
/// configuration when present), evaluate only not-yet-seen configurations,
/// infer candidates per covered location, stop at the fix-point, then check
/// and select the strongest per location.
InferenceResult run(CoverageOracle& oracle, const ConfigSpace& space,
                    const InferenceParams& params);

/// One candidate-inference pass over every covered location.
std::map<std::string, CandidateTuple> infer_candidates_all(const ConfigSpace& space,
                                                           const CoverageMap& coverage);

/// check() each component against the covering configurations, then pick the
/// strongest per location.
std::map<std::string, FinalResult> check_and_select(
    const ConfigSpace& space, const CoverageMap& coverage,
    const std::map<std::string, CandidateTuple>& tuples,
    std::uint64_t cap = kDefaultImplicationCap);

/// Evaluates a batch of configurations, optionally `jobs` at a time; oracle
/// failures surface as OracleError naming the configuration.
std::vector<std::set<std::string>> evaluate_batch(CoverageOracle& oracle,
                                                  const ConfigSpace& space,
                                                  const std::vector<Configuration>& batch,
                                                  int jobs = 1);

}  // namespace covinfer

#endif
