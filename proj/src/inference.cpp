#include "covinfer/inference.hpp"

#include <algorithm>
#include <future>
#include <optional>

namespace covinfer {

std::set<std::string> CoverageMap::locations() const {
  std::set<std::string> out;
  for (const auto& [location, ids] : covered) out.insert(location);
  return out;
}

std::vector<Configuration> CoverageMap::covering(const std::string& location) const {
  std::vector<Configuration> out;
  auto it = covered.find(location);
  if (it == covered.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t id : it->second) out.push_back(universe.at(id));
  return out;
}

std::vector<Configuration> CoverageMap::non_covering(const std::string& location) const {
  std::vector<Configuration> out;
  auto it = covered.find(location);
  for (std::size_t id = 0; id < universe.size(); ++id) {
    if (it == covered.end() || it->second.count(id) == 0) out.push_back(universe[id]);
  }
  return out;
}

bool fixpoint_reached(const CoverageMap& prev_cov,
                      const std::map<std::string, CandidateTuple>& prev_tuples,
                      const CoverageMap& cur_cov,
                      const std::map<std::string, CandidateTuple>& cur_tuples) {
  if (prev_cov.locations() != cur_cov.locations()) return false;
  if (prev_tuples.size() != cur_tuples.size()) return false;
  for (const auto& [location, tuple] : cur_tuples) {
    auto it = prev_tuples.find(location);
    if (it == prev_tuples.end()) return false;
    if (!it->second.same_candidates(tuple)) return false;
  }
  return true;
}

namespace {

Configuration mutated_config(const ConfigSpace& space, const SettingSet& core,
                             OptionIndex mutated_option, ValueIndex mutated_value, Rng& rng) {
  SettingSet partial = core;
  partial.remove(mutated_option);
  partial.constrain(space, mutated_option, {mutated_value});
  return complete_randomly(partial, space, rng);
}

/// First configuration in lexicographic order not in `existing`; used when
/// rejection sampling stalls near exhaustion.
std::optional<Configuration> first_unseen(const ConfigSpace& space,
                                          const std::set<Configuration>& existing) {
  std::optional<Configuration> found;
  std::vector<OptionIndex> options(space.option_count());
  for (OptionIndex i = 0; i < options.size(); ++i) options[i] = i;
  for_each_assignment(space, options, [&](const Configuration& config) {
    if (existing.count(config) == 0) {
      found = config;
      return false;
    }
    return true;
  });
  return found;
}

}  // namespace

std::vector<Configuration> gen_new_configs(const std::map<std::string, CandidateTuple>& tuples,
                                           const std::set<Configuration>& existing,
                                           const ConfigSpace& space, Rng& rng,
                                           std::set<SettingSet>* explored) {
  if (tuples.empty()) {
    throw ValidationError("gen_new_configs requires at least one candidate tuple");
  }

  // Candidate cores per location in sorted order: conj, the non-covering core
  // behind disj, then the two auxiliaries. Keeping this order fixed makes the
  // random tie-break reproducible.
  std::vector<SettingSet> cores;
  cores.reserve(tuples.size() * 4);
  for (const auto& [location, tuple] : tuples) {
    cores.push_back(tuple.conj.core());
    if (tuple.disj.kind() == InteractionKind::Disj && !tuple.disj.clauses().empty()) {
      cores.push_back(tuple.disj.clauses().negated(space));
    } else {
      cores.push_back(SettingSet());
    }
    cores.push_back(tuple.conj_prime);
    cores.push_back(tuple.disj_prime);
  }

  // Prefer cores that have not been mutation bases yet; once the pool is
  // exhausted, any core may be re-selected (its random fills differ).
  std::vector<const SettingSet*> eligible;
  if (explored != nullptr) {
    for (const SettingSet& core : cores) {
      if (explored->count(core) == 0) eligible.push_back(&core);
    }
  }
  if (eligible.empty()) {
    for (const SettingSet& core : cores) eligible.push_back(&core);
  }
  std::size_t longest = 0;
  for (const SettingSet* core : eligible) longest = std::max(longest, core->length());
  std::vector<const SettingSet*> candidates;
  for (const SettingSet* core : eligible) {
    if (core->length() == longest) candidates.push_back(core);
  }
  const SettingSet& chosen = *candidates[rng.below(candidates.size())];
  if (explored != nullptr) explored->insert(chosen);

  std::vector<Configuration> batch;
  std::set<Configuration> batch_seen;
  for (const auto& [option, core_values] : chosen.constraints()) {
    const std::size_t domain_size = space.option(option).values.size();
    for (std::size_t v = 0; v < domain_size; ++v) {
      const ValueIndex value = static_cast<ValueIndex>(v);
      if (core_values.count(value) != 0) continue;
      Configuration config = mutated_config(space, chosen, option, value, rng);
      if (existing.count(config) != 0) continue;
      if (!batch_seen.insert(config).second) continue;
      batch.push_back(std::move(config));
    }
  }
  if (!batch.empty()) return batch;

  // Nothing new from mutations: fall back to one fresh unseen configuration.
  if (space.space_size_at_most(existing.size(), nullptr)) {
    return {};  // space exhausted
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Configuration config = complete_randomly(SettingSet(), space, rng);
    if (existing.count(config) == 0) return {config};
  }
  if (auto config = first_unseen(space, existing)) return {*config};
  return {};
}

std::vector<std::set<std::string>> evaluate_batch(CoverageOracle& oracle,
                                                  const ConfigSpace& space,
                                                  const std::vector<Configuration>& batch,
                                                  int jobs) {
  auto evaluate_one = [&oracle, &space](const Configuration& config) -> std::set<std::string> {
    try {
      return oracle.coverage(config);
    } catch (const OracleError&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleError("coverage oracle failed for configuration [" +
                        canonical_config_string(space, config) + "]: " + e.what());
    }
  };

  std::vector<std::set<std::string>> results(batch.size());
  if (jobs <= 1 || batch.size() <= 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      results[i] = evaluate_one(batch[i]);
    }
    return results;
  }
  // Waves of at most `jobs` concurrent evaluations; results merge in
  // configuration order afterwards, so completion order cannot matter.
  for (std::size_t start = 0; start < batch.size(); start += static_cast<std::size_t>(jobs)) {
    const std::size_t end = std::min(batch.size(), start + static_cast<std::size_t>(jobs));
    std::vector<std::future<std::set<std::string>>> wave;
    for (std::size_t i = start; i < end; ++i) {
      wave.push_back(
          std::async(std::launch::async, [&evaluate_one, &batch, i] { return evaluate_one(batch[i]); }));
    }
    for (std::size_t i = start; i < end; ++i) {
      results[i] = wave[i - start].get();
    }
  }
  return results;
}

std::map<std::string, CandidateTuple> infer_candidates_all(const ConfigSpace& space,
                                                           const CoverageMap& coverage) {
  std::map<std::string, CandidateTuple> tuples;
  for (const auto& [location, ids] : coverage.covered) {
    std::vector<Configuration> covering = coverage.covering(location);
    std::vector<Configuration> non_covering = coverage.non_covering(location);
    tuples.emplace(location, infer_candidates(space, covering, non_covering));
  }
  return tuples;
}

std::map<std::string, FinalResult> check_and_select(
    const ConfigSpace& space, const CoverageMap& coverage,
    const std::map<std::string, CandidateTuple>& tuples, std::uint64_t cap) {
  std::map<std::string, FinalResult> out;
  for (const auto& [location, tuple] : tuples) {
    std::vector<Configuration> covering = coverage.covering(location);
    CandidateTuple checked = tuple;
    checked.conj = check(tuple.conj, covering);
    checked.disj = check(tuple.disj, covering);
    checked.conjdisj = check(tuple.conjdisj, covering);
    checked.disjconj = check(tuple.disjconj, covering);
    out.emplace(location, sel_strongest(space, checked, cap));
  }
  return out;
}

InferenceResult run(CoverageOracle& oracle, const ConfigSpace& space,
                    const InferenceParams& params) {
  if (params.max_iterations < 1) {
    throw ValidationError("max_iterations must be at least 1");
  }
  if (params.stability_streak < 1) {
    throw ValidationError("stability_streak must be at least 1");
  }
  Rng rng(params.seed);
  InferenceResult result;
  result.space = space;
  result.seed = params.seed;

  std::vector<Configuration> pending = one_way_covering_array(space, rng);
  if (params.include_default && space.default_config().has_value()) {
    pending.push_back(*space.default_config());
  }

  CoverageMap coverage;
  CoverageMap prev_coverage;
  std::set<Configuration> seen;
  std::map<std::string, CandidateTuple> tuples;
  std::set<SettingSet> explored_cores;
  int quiet_iterations = 0;

  for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
    std::vector<Configuration> fresh;
    for (Configuration& config : pending) {
      if (seen.insert(config).second) fresh.push_back(std::move(config));
    }
    pending.clear();

    std::vector<std::set<std::string>> batch_coverage =
        evaluate_batch(oracle, space, fresh, params.jobs);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const std::size_t id = coverage.universe.size();
      coverage.universe.push_back(fresh[i]);
      for (const std::string& location : batch_coverage[i]) {
        coverage.covered[location].insert(id);
      }
    }

    std::map<std::string, CandidateTuple> prev_tuples = std::move(tuples);
    tuples = infer_candidates_all(space, coverage);

    IterationRecord record;
    record.new_configs = std::move(fresh);
    for (const auto& [location, tuple] : tuples) {
      record.tuple_digests.emplace(
          location, std::array<std::string, 4>{render(space, tuple.conj, RenderStyle::Ascii),
                                               render(space, tuple.disj, RenderStyle::Ascii),
                                               render(space, tuple.conjdisj, RenderStyle::Ascii),
                                               render(space, tuple.disjconj, RenderStyle::Ascii)});
    }
    record.provisional = check_and_select(space, coverage, tuples, params.implication_cap);
    result.history.push_back(std::move(record));
    result.iterations = iteration;

    // Fix-point sustained for a streak of iterations.
    const bool stable =
        iteration > 1 && fixpoint_reached(prev_coverage, prev_tuples, coverage, tuples);
    prev_coverage = coverage;
    quiet_iterations = stable ? quiet_iterations + 1 : 0;
    if (quiet_iterations >= params.stability_streak) break;

    if (iteration == params.max_iterations) {
      result.warnings.push_back("iteration limit (" + std::to_string(params.max_iterations) +
                                ") reached before the fix-point");
      break;
    }

    if (!tuples.empty()) {
      pending = gen_new_configs(tuples, seen, space, rng, &explored_cores);
    }
    if (tuples.empty() || pending.empty()) {
      break;  // nothing left to refine; the next pass would change nothing
    }
  }

  result.configs_used = coverage.universe.size();
  if (!result.history.empty()) {
    result.interactions = result.history.back().provisional;
  }
  return result;
}

}  // namespace covinfer
