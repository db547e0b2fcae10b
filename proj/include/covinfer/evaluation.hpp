#ifndef COVINFER_EVALUATION_HPP
#define COVINFER_EVALUATION_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "covinfer/inference.hpp"

namespace covinfer {

/// Comparison of two per-location interaction maps. The f-score decomposes
/// each interaction into atoms -- (slot in {core, clauses}, option, value
/// set) -- and takes the balanced f over the atom sets, 1.0 when both are
/// empty (both true) and 0.0 when exactly one is. Locations present on only
/// one side score 0. The overall score is the arithmetic mean over the union
/// of locations.
struct EvalReport {
  long long delta_cov = 0;  // |locations(inferred)| - |locations(exact)|
  double f_score = 0.0;
  std::map<std::string, double> per_location;
  std::set<std::string> missing_locations;  // in exact but not inferred
};

EvalReport f_score(const ConfigSpace& space, const std::map<std::string, FinalResult>& inferred,
                   const std::map<std::string, FinalResult>& exact);

long long delta_cov(const std::map<std::string, FinalResult>& inferred,
                    const std::map<std::string, FinalResult>& exact);

/// One candidate-inference pass over every configuration of the space
/// (ground truth for template-expressible subjects). Refuses spaces larger
/// than `cap`.
InferenceResult exhaustive_infer(CoverageOracle& oracle, const ConfigSpace& space,
                                 std::uint64_t cap = kDefaultEnumerationCap,
                                 std::uint64_t record_seed = 0);

/// One pass over `n_configs` distinct uniformly sampled configurations (plus
/// the default when requested). Budgets above the space size clamp with a
/// warning; with the full space this is identical to exhaustive_infer.
InferenceResult random_baseline(CoverageOracle& oracle, const ConfigSpace& space,
                                std::size_t n_configs, bool include_default, std::uint64_t seed);

struct TrajectoryPoint {
  int iteration = 0;
  double normalized_x = 0.0;
  double score = 0.0;
};

/// Scores each per-iteration provisional snapshot against `exact`; x is
/// iteration / total.
std::vector<TrajectoryPoint> convergence_trajectory(
    const InferenceResult& result, const std::map<std::string, FinalResult>& exact);

struct MinCoverResult {
  std::vector<Configuration> configs;
  std::set<std::string> covered;  // locations whose interaction some config satisfies
};

/// Greedy minimal covering configurations: drop interactions implied by
/// others, conjoin the rest in random order while the running conjunction
/// stays satisfiable (first-fit into groups), then emit one configuration per
/// group by constraint propagation plus random completion.
MinCoverResult min_cover(const ConfigSpace& space,
                         const std::map<std::string, FinalResult>& interactions, Rng& rng,
                         std::uint64_t cap = kDefaultImplicationCap);

/// Best (fewest configurations) of `draws` independent greedy runs.
MinCoverResult min_cover_best_of(const ConfigSpace& space,
                                 const std::map<std::string, FinalResult>& interactions,
                                 std::uint64_t seed, int draws = 10,
                                 std::uint64_t cap = kDefaultImplicationCap);

struct HistogramRow {
  std::size_t length = 0;
  std::size_t interactions = 0;  // distinct interactions of this length
  std::size_t locations = 0;     // locations carrying one of them
};

std::vector<HistogramRow> length_histogram(const std::map<std::string, FinalResult>& interactions);

/// Median with even-count averaging.
double median(std::vector<double> values);
/// Semi-interquartile range (Q3 - Q1) / 2 with linearly interpolated quartiles.
double siqr(std::vector<double> values);

}  // namespace covinfer

#endif
