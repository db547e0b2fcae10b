#include "covinfer/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "covinfer/interaction.hpp"

namespace covinfer {

namespace {

// (clause slot?, option, value set)
using Atom = std::tuple<bool, OptionIndex, std::set<ValueIndex>>;

void collect_atoms(const SettingSet& settings, bool clause_slot, std::set<Atom>* out) {
  for (const auto& [option, values] : settings.constraints()) {
    out->insert({clause_slot, option, values});
  }
}

std::set<Atom> atoms_of(const FinalResult& result) {
  std::set<Atom> out;
  for (const Interaction& part : result.parts) {
    collect_atoms(part.core(), false, &out);
    collect_atoms(part.clauses(), true, &out);
  }
  return out;
}

double location_f(const FinalResult& inferred, const FinalResult& exact) {
  std::set<Atom> a = atoms_of(inferred);
  std::set<Atom> b = atoms_of(exact);
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t shared = 0;
  for (const Atom& atom : a) shared += b.count(atom);
  if (shared == 0) return 0.0;
  const double precision = static_cast<double>(shared) / static_cast<double>(a.size());
  const double recall = static_cast<double>(shared) / static_cast<double>(b.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

long long delta_cov(const std::map<std::string, FinalResult>& inferred,
                    const std::map<std::string, FinalResult>& exact) {
  return static_cast<long long>(inferred.size()) - static_cast<long long>(exact.size());
}

EvalReport f_score(const ConfigSpace& space, const std::map<std::string, FinalResult>& inferred,
                   const std::map<std::string, FinalResult>& exact) {
  (void)space;
  EvalReport report;
  report.delta_cov = delta_cov(inferred, exact);

  std::set<std::string> locations;
  for (const auto& [location, result] : inferred) locations.insert(location);
  for (const auto& [location, result] : exact) locations.insert(location);

  double sum = 0.0;
  for (const std::string& location : locations) {
    auto it_inferred = inferred.find(location);
    auto it_exact = exact.find(location);
    double f = 0.0;
    if (it_inferred != inferred.end() && it_exact != exact.end()) {
      f = location_f(it_inferred->second, it_exact->second);
    }
    if (it_inferred == inferred.end()) report.missing_locations.insert(location);
    report.per_location[location] = f;
    sum += f;
  }
  report.f_score = locations.empty() ? 1.0 : sum / static_cast<double>(locations.size());
  return report;
}

namespace {

/// One inference pass over a fixed configuration set.
InferenceResult single_pass(CoverageOracle& oracle, const ConfigSpace& space,
                            std::vector<Configuration> configs, std::uint64_t seed,
                            std::vector<std::string> warnings) {
  InferenceResult result;
  result.space = space;
  result.seed = seed;
  result.warnings = std::move(warnings);

  CoverageMap coverage;
  std::vector<std::set<std::string>> batch_coverage = evaluate_batch(oracle, space, configs, 1);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::size_t id = coverage.universe.size();
    coverage.universe.push_back(configs[i]);
    for (const std::string& location : batch_coverage[i]) {
      coverage.covered[location].insert(id);
    }
  }

  std::map<std::string, CandidateTuple> tuples = infer_candidates_all(space, coverage);
  IterationRecord record;
  record.new_configs = std::move(configs);
  for (const auto& [location, tuple] : tuples) {
    record.tuple_digests.emplace(
        location, std::array<std::string, 4>{render(space, tuple.conj, RenderStyle::Ascii),
                                             render(space, tuple.disj, RenderStyle::Ascii),
                                             render(space, tuple.conjdisj, RenderStyle::Ascii),
                                             render(space, tuple.disjconj, RenderStyle::Ascii)});
  }
  record.provisional = check_and_select(space, coverage, tuples, kDefaultImplicationCap);
  result.interactions = record.provisional;
  result.history.push_back(std::move(record));
  result.iterations = 1;
  result.configs_used = coverage.universe.size();
  return result;
}

}  // namespace

InferenceResult exhaustive_infer(CoverageOracle& oracle, const ConfigSpace& space,
                                 std::uint64_t cap, std::uint64_t record_seed) {
  std::vector<Configuration> configs = all_configurations(space, cap);
  return single_pass(oracle, space, std::move(configs), record_seed, {});
}

InferenceResult random_baseline(CoverageOracle& oracle, const ConfigSpace& space,
                                std::size_t n_configs, bool include_default, std::uint64_t seed) {
  if (n_configs < 1) {
    throw ValidationError("random_baseline requires a budget of at least 1 configuration");
  }
  std::vector<std::string> warnings;

  std::uint64_t size = 0;
  if (space.space_size_at_most(n_configs, &size)) {
    // Budget meets or exceeds the space: clamp to every configuration, which
    // makes the result identical to an exhaustive pass.
    if (size < n_configs) {
      warnings.push_back("budget " + std::to_string(n_configs) + " clamped to the space size " +
                         std::to_string(size));
    }
    std::vector<Configuration> configs = all_configurations(space, size);
    return single_pass(oracle, space, std::move(configs), seed, std::move(warnings));
  }

  Rng rng(seed);
  std::set<Configuration> sample;
  if (include_default && space.default_config().has_value()) {
    sample.insert(*space.default_config());
  }
  std::uint64_t attempts = 0;
  const std::uint64_t attempt_limit = 1000 * (static_cast<std::uint64_t>(n_configs) + 10);
  while (sample.size() < n_configs) {
    if (++attempts > attempt_limit) {
      throw ValidationError("could not sample " + std::to_string(n_configs) +
                            " distinct configurations");
    }
    sample.insert(complete_randomly(SettingSet(), space, rng));
  }
  std::vector<Configuration> configs(sample.begin(), sample.end());  // lexicographic
  return single_pass(oracle, space, std::move(configs), seed, std::move(warnings));
}

std::vector<TrajectoryPoint> convergence_trajectory(
    const InferenceResult& result, const std::map<std::string, FinalResult>& exact) {
  std::vector<TrajectoryPoint> out;
  const double total = static_cast<double>(result.history.size());
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    TrajectoryPoint point;
    point.iteration = static_cast<int>(i + 1);
    point.normalized_x = static_cast<double>(i + 1) / total;
    point.score = f_score(result.space, result.history[i].provisional, exact).f_score;
    out.push_back(point);
  }
  return out;
}

namespace {

/// Per-option candidate sets narrowed by template constraints; any completion
/// of a state that admitted every part satisfies their conjunction.
struct SatState {
  std::vector<std::set<ValueIndex>> candidates;
};

SatState full_state(const ConfigSpace& space) {
  SatState state;
  state.candidates.resize(space.option_count());
  for (OptionIndex o = 0; o < space.option_count(); ++o) {
    for (std::size_t v = 0; v < space.option(o).values.size(); ++v) {
      state.candidates[o].insert(static_cast<ValueIndex>(v));
    }
  }
  return state;
}

bool restrict_to(SatState* state, OptionIndex option, const std::set<ValueIndex>& values) {
  std::set<ValueIndex> narrowed;
  std::set_intersection(state->candidates[option].begin(), state->candidates[option].end(),
                        values.begin(), values.end(),
                        std::inserter(narrowed, narrowed.begin()));
  if (narrowed.empty()) return false;
  state->candidates[option] = std::move(narrowed);
  return true;
}

bool apply_core(SatState* state, const SettingSet& core) {
  for (const auto& [option, values] : core.constraints()) {
    if (!restrict_to(state, option, values)) return false;
  }
  return true;
}

struct SatSearch {
  const ConfigSpace& space;
  const std::vector<const Interaction*>& parts;
  std::uint64_t budget;

  bool solve(std::size_t index, SatState state, SatState* out) {
    if (budget == 0) return false;  // enumeration cap: give up, treat as unsat
    --budget;
    if (index == parts.size()) {
      *out = std::move(state);
      return true;
    }
    const Interaction& part = *parts[index];
    switch (part.kind()) {
      case InteractionKind::True:
        return solve(index + 1, std::move(state), out);
      case InteractionKind::Conj: {
        if (!apply_core(&state, part.core())) return false;
        return solve(index + 1, std::move(state), out);
      }
      case InteractionKind::Disj: {
        for (const auto& [option, values] : part.clauses().constraints()) {
          SatState branch = state;
          if (restrict_to(&branch, option, values) && solve(index + 1, std::move(branch), out)) {
            return true;
          }
        }
        return false;
      }
      case InteractionKind::ConjDisj: {
        if (!apply_core(&state, part.core())) return false;
        for (const auto& [option, values] : part.clauses().constraints()) {
          SatState branch = state;
          if (restrict_to(&branch, option, values) && solve(index + 1, std::move(branch), out)) {
            return true;
          }
        }
        return false;
      }
      case InteractionKind::DisjConj: {
        for (const auto& [option, values] : part.clauses().constraints()) {
          SatState branch = state;
          if (restrict_to(&branch, option, values) && solve(index + 1, std::move(branch), out)) {
            return true;
          }
        }
        SatState branch = state;
        if (apply_core(&branch, part.core())) {
          return solve(index + 1, std::move(branch), out);
        }
        return false;
      }
    }
    return false;
  }
};

bool satisfiable(const ConfigSpace& space, const std::vector<const Interaction*>& parts,
                 std::uint64_t cap, SatState* out) {
  SatSearch search{space, parts, cap};
  return search.solve(0, full_state(space), out);
}

std::vector<const Interaction*> parts_of(const std::vector<const FinalResult*>& group) {
  std::vector<const Interaction*> parts;
  for (const FinalResult* result : group) {
    for (const Interaction& part : result->parts) parts.push_back(&part);
  }
  return parts;
}

Configuration witness(const ConfigSpace& space, const SatState& state, Rng& rng) {
  SettingSet partial;
  for (OptionIndex option = 0; option < space.option_count(); ++option) {
    if (state.candidates[option].size() < space.option(option).values.size()) {
      partial.constrain(space, option, state.candidates[option]);
    }
  }
  return complete_randomly(partial, space, rng);
}

}  // namespace

MinCoverResult min_cover(const ConfigSpace& space,
                         const std::map<std::string, FinalResult>& interactions, Rng& rng,
                         std::uint64_t cap) {
  std::vector<std::pair<std::string, const FinalResult*>> items;
  for (const auto& [location, result] : interactions) {
    items.emplace_back(location, &result);
  }

  for (const auto& [location, result] : items) {
    SatState state;
    std::vector<const Interaction*> parts = parts_of({result});
    if (!satisfiable(space, parts, cap, &state)) {
      throw ValidationError("interaction for '" + location + "' is unsatisfiable: " +
                            render(space, *result, RenderStyle::Ascii));
    }
  }

  // Drop interactions implied by others; logically equal ones keep their
  // first (lowest location) representative.
  std::vector<bool> dropped(items.size(), false);
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = 0; j < items.size() && !dropped[i]; ++j) {
      if (i == j || dropped[j]) continue;
      if (implies(*items[j].second, *items[i].second, space, cap) != Implication::Yes) continue;
      if (implies(*items[i].second, *items[j].second, space, cap) == Implication::Yes) {
        if (j < i) dropped[i] = true;
      } else {
        dropped[i] = true;
      }
    }
  }
  std::vector<const FinalResult*> survivors;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!dropped[i]) survivors.push_back(items[i].second);
  }

  // Greedy conjoining in random order, first group whose conjunction stays
  // satisfiable; conflicts start a new group.
  rng.shuffle(survivors);
  std::vector<std::vector<const FinalResult*>> groups;
  for (const FinalResult* candidate : survivors) {
    bool placed = false;
    for (std::vector<const FinalResult*>& group : groups) {
      group.push_back(candidate);
      SatState state;
      if (satisfiable(space, parts_of(group), cap, &state)) {
        placed = true;
        break;
      }
      group.pop_back();
    }
    if (!placed) groups.push_back({candidate});
  }

  MinCoverResult result;
  for (const std::vector<const FinalResult*>& group : groups) {
    SatState state;
    if (!satisfiable(space, parts_of(group), cap, &state)) {
      throw ValidationError("internal: group conjunction became unsatisfiable");
    }
    result.configs.push_back(witness(space, state, rng));
  }

  for (const auto& [location, interaction] : interactions) {
    for (const Configuration& config : result.configs) {
      if (satisfies(config, interaction)) {
        result.covered.insert(location);
        break;
      }
    }
  }
  return result;
}

MinCoverResult min_cover_best_of(const ConfigSpace& space,
                                 const std::map<std::string, FinalResult>& interactions,
                                 std::uint64_t seed, int draws, std::uint64_t cap) {
  if (draws < 1) draws = 1;
  Rng rng(seed);
  MinCoverResult best;
  bool have_best = false;
  for (int i = 0; i < draws; ++i) {
    MinCoverResult attempt = min_cover(space, interactions, rng, cap);
    if (!have_best || attempt.configs.size() < best.configs.size()) {
      best = std::move(attempt);
      have_best = true;
    }
  }
  return best;
}

std::vector<HistogramRow> length_histogram(
    const std::map<std::string, FinalResult>& interactions) {
  std::map<std::size_t, std::size_t> location_counts;
  std::map<std::size_t, std::vector<const FinalResult*>> distinct;
  for (const auto& [location, result] : interactions) {
    const std::size_t length = result.length();
    location_counts[length] += 1;
    std::vector<const FinalResult*>& known = distinct[length];
    bool found = false;
    for (const FinalResult* seen : known) {
      if (*seen == result) {
        found = true;
        break;
      }
    }
    if (!found) known.push_back(&result);
  }
  std::vector<HistogramRow> rows;
  for (const auto& [length, count] : location_counts) {
    rows.push_back({length, distinct[length].size(), count});
  }
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted.front();
  const double position = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = static_cast<std::size_t>(std::ceil(position));
  const double fraction = position - static_cast<double>(lower);
  return sorted[lower] + (sorted[upper] - sorted[lower]) * fraction;
}

}  // namespace

double siqr(std::vector<double> values) {
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  return (quantile(values, 0.75) - quantile(values, 0.25)) / 2.0;
}

}  // namespace covinfer
