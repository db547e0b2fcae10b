#include <doctest.h>

#include <algorithm>

#include "covinfer/evaluation.hpp"
#include "covinfer/json_io.hpp"
#include "covinfer/oracle.hpp"
#include "support/test_support.hpp"

using namespace covinfer;
namespace ts = covinfer::testsupport;

TEST_CASE("exhaustive inference nails the demo subject exactly") {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  InferenceResult result = exhaustive_infer(oracle, spec.space);
  CHECK(result.configs_used == 320);
  CHECK(result.iterations == 1);

  std::map<std::string, FinalResult> truth = ts::demo_truth(spec.space);
  CHECK(result.interactions == truth);
  EvalReport report = f_score(spec.space, result.interactions, truth);
  CHECK(report.f_score == doctest::Approx(1.0));
  CHECK(report.delta_cov == 0);
}

TEST_CASE("exhaustive inference of an unconditional location is true") {
  ts::TempDir dir("subject");
  write_text_file(dir.file("one.json"), R"({
    "space": {"options": [{"name": "a", "values": ["0", "1"]}]},
    "locations": [{"id": "L0", "guard": "true"}]
  })");
  SubjectSpec spec = std::get<SubjectSpec>(load_subject(dir.file("one.json")));
  SyntheticOracle oracle(spec);
  InferenceResult result = exhaustive_infer(oracle, spec.space);
  CHECK(result.interactions.at("L0").is_true());
}

TEST_CASE("exhaustive inference refuses oversized spaces") {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  CHECK_THROWS_WITH_AS(exhaustive_infer(oracle, spec.space, 100), doctest::Contains("320"),
                       ValidationError);
}

TEST_CASE("exhaustive inference equals ground truth on random template subjects") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ts::GeneratedSubject subject = ts::generate_subject(seed);
    SyntheticOracle oracle(subject.spec);
    InferenceResult result = exhaustive_infer(oracle, subject.spec.space);
    for (const LocationSpec& location : subject.spec.locations) {
      REQUIRE_MESSAGE(result.interactions.count(location.id) == 1, "subject seed ", seed,
                      " never covered ", location.id);
      CHECK_MESSAGE(ts::equivalent_to_guard(subject.spec.space, location.guard,
                                            result.interactions.at(location.id)),
                    "subject seed ", seed, " location ", location.id, " inferred ",
                    render(subject.spec.space, result.interactions.at(location.id),
                           RenderStyle::Ascii));
    }
    EvalReport report = f_score(subject.spec.space, result.interactions, subject.truth);
    CHECK_MESSAGE(report.f_score == doctest::Approx(1.0), "subject seed ", seed);
  }
}

TEST_CASE("f_score of a result against itself is 1") {
  SubjectSpec spec = demo_subject();
  std::map<std::string, FinalResult> truth = ts::demo_truth(spec.space);
  EvalReport report = f_score(spec.space, truth, truth);
  CHECK(report.f_score == doctest::Approx(1.0));
  CHECK(report.delta_cov == 0);
  CHECK(report.missing_locations.empty());
}

TEST_CASE("f_score of a near miss follows the atom arithmetic") {
  // Exact G && d && (!R || !iso) against inferred G && d: precision 1,
  // recall 1/2, f two thirds.
  ConfigSpace space({{"G", {"0", "1"}},
                     {"d", {"0", "1"}},
                     {"R", {"0", "1"}},
                     {"iso8601", {"0", "1"}}});
  std::map<std::string, FinalResult> exact, inferred;
  exact.emplace("p.pl:10", parse_final_result(space, "G && d && (!R || !iso8601)"));
  inferred.emplace("p.pl:10", parse_final_result(space, "G && d"));
  EvalReport report = f_score(space, inferred, exact);
  CHECK(report.f_score == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("f_score is zero for disjoint atoms and for missing locations") {
  ConfigSpace space({{"a", {"0", "1"}}, {"b", {"0", "1"}}});
  std::map<std::string, FinalResult> exact, inferred;
  exact.emplace("L0", parse_final_result(space, "a"));
  inferred.emplace("L0", parse_final_result(space, "b"));
  CHECK(f_score(space, inferred, exact).f_score == doctest::Approx(0.0));

  // One side true (no atoms), the other constrained.
  inferred["L0"] = parse_final_result(space, "true");
  CHECK(f_score(space, inferred, exact).f_score == doctest::Approx(0.0));

  // Location only on the exact side: scores zero and is reported missing.
  std::map<std::string, FinalResult> empty;
  EvalReport report = f_score(space, empty, exact);
  CHECK(report.f_score == doctest::Approx(0.0));
  CHECK(report.delta_cov == -1);
  CHECK(report.missing_locations == std::set<std::string>{"L0"});

  // Two missing locations give delta -2.
  exact.emplace("L1", parse_final_result(space, "b"));
  CHECK(f_score(space, empty, exact).delta_cov == -2);

  // Both empty results agree vacuously.
  CHECK(f_score(space, empty, empty).f_score == doctest::Approx(1.0));
}

TEST_CASE("random baseline with the whole space matches exhaustive bit for bit") {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  InferenceResult exhaustive = exhaustive_infer(oracle, spec.space, kDefaultEnumerationCap, 42);
  InferenceResult baseline = random_baseline(oracle, spec.space, 320, false, 42);
  CHECK(dump_document(result_to_json(exhaustive)) == dump_document(result_to_json(baseline)));

  // Over-budget clamps with a warning.
  InferenceResult clamped = random_baseline(oracle, spec.space, 500, false, 42);
  CHECK(clamped.configs_used == 320);
  REQUIRE(clamped.warnings.size() == 1);
  CHECK(clamped.warnings.front().find("clamped") != std::string::npos);
}

TEST_CASE("random baseline samples the requested number of distinct configurations") {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  InferenceResult result = random_baseline(oracle, spec.space, 40, false, 9);
  CHECK(result.configs_used == 40);
  CHECK(result.iterations == 1);

  std::set<Configuration> unique(result.history.front().new_configs.begin(),
                                 result.history.front().new_configs.end());
  CHECK(unique.size() == 40);

  InferenceResult single = random_baseline(oracle, spec.space, 1, false, 9);
  CHECK(single.configs_used == 1);
  CHECK_THROWS_AS(random_baseline(oracle, spec.space, 0, false, 9), ValidationError);
}

TEST_CASE("convergence trajectory replays the history") {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  InferenceParams params;
  params.seed = 7;
  InferenceResult result = run(oracle, spec.space, params);
  std::map<std::string, FinalResult> truth = ts::demo_truth(spec.space);

  std::vector<TrajectoryPoint> trajectory = convergence_trajectory(result, truth);
  REQUIRE(trajectory.size() == static_cast<std::size_t>(result.iterations));
  CHECK(trajectory.back().normalized_x == doctest::Approx(1.0));
  CHECK(trajectory.back().score ==
        doctest::Approx(f_score(spec.space, result.interactions, truth).f_score));

  InferenceResult one_shot = exhaustive_infer(oracle, spec.space);
  std::vector<TrajectoryPoint> single = convergence_trajectory(one_shot, truth);
  REQUIRE(single.size() == 1);
  CHECK(single.front().normalized_x == doctest::Approx(1.0));
}

TEST_CASE("min_cover drops implied interactions") {
  ConfigSpace space({{"x", {"0", "1"}}, {"y", {"0", "1"}}, {"z", {"0", "1"}},
                     {"w", {"0", "1"}}});
  std::map<std::string, FinalResult> interactions;
  interactions.emplace("A", parse_final_result(space, "x && y"));
  interactions.emplace("B", parse_final_result(space, "x"));
  Rng rng(4);
  MinCoverResult result = min_cover(space, interactions, rng);
  REQUIRE(result.configs.size() == 1);
  // The surviving group is x && y; its witness covers both inputs.
  CHECK(result.configs.front().value_at(0) == 1);
  CHECK(result.configs.front().value_at(1) == 1);
  CHECK(result.covered == std::set<std::string>{"A", "B"});
}

TEST_CASE("min_cover conjoins compatible interactions into one configuration") {
  ConfigSpace space({{"x", {"0", "1"}}, {"y", {"0", "1"}}, {"z", {"0", "1"}},
                     {"w", {"0", "1"}}});
  std::map<std::string, FinalResult> interactions;
  interactions.emplace("A", parse_final_result(space, "x && y"));
  interactions.emplace("B", parse_final_result(space, "z || w"));
  Rng rng(4);
  MinCoverResult result = min_cover(space, interactions, rng);
  REQUIRE(result.configs.size() == 1);
  const Configuration& config = result.configs.front();
  CHECK(config.value_at(0) == 1);
  CHECK(config.value_at(1) == 1);
  CHECK((config.value_at(2) == 1 || config.value_at(3) == 1));
}

TEST_CASE("min_cover on the demo subject finds a two-configuration cover") {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  std::map<std::string, FinalResult> truth = ts::demo_truth(spec.space);

  MinCoverResult best = min_cover_best_of(spec.space, truth, 11, 10);
  CHECK(best.covered.size() == truth.size());
  CHECK(best.configs.size() == 2);

  // Brute-force minimum: no single configuration satisfies every interaction
  // (L0 wants x && y, L2 wants the opposite), so two is optimal.
  for (const Configuration& config : all_configurations(spec.space)) {
    bool all = true;
    for (const auto& [location, interaction] : truth) {
      if (!satisfies(config, interaction)) all = false;
    }
    CHECK_FALSE(all);
  }

  // Running the oracle on the emitted configurations covers every location.
  std::set<std::string> covered;
  for (const Configuration& config : best.configs) {
    std::set<std::string> one = oracle.coverage(config);
    covered.insert(one.begin(), one.end());
  }
  CHECK(covered.size() == 6);
}

TEST_CASE("min_cover rejects an unsatisfiable interaction") {
  ConfigSpace space({{"x", {"0", "1"}}});
  std::map<std::string, FinalResult> interactions;
  interactions.emplace("dead", FinalResult{{Interaction::contradiction()}});
  Rng rng(1);
  CHECK_THROWS_WITH_AS(min_cover(space, interactions, rng), doctest::Contains("dead"),
                       ValidationError);
}

TEST_CASE("min_cover covers every interaction on random subjects") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    ts::GeneratedSubject subject = ts::generate_subject(seed);
    SyntheticOracle oracle(subject.spec);
    InferenceResult exact = exhaustive_infer(oracle, subject.spec.space);
    if (exact.interactions.empty()) continue;
    Rng rng(seed);
    MinCoverResult result = min_cover(subject.spec.space, exact.interactions, rng);
    CHECK(result.configs.size() <= exact.interactions.size());
    CHECK(result.covered.size() == exact.interactions.size());
    for (const auto& [location, interaction] : exact.interactions) {
      bool hit = false;
      for (const Configuration& config : result.configs) {
        if (satisfies(config, interaction)) hit = true;
      }
      CHECK_MESSAGE(hit, "seed ", seed, " location ", location);
    }
  }
}

TEST_CASE("length histogram buckets by mentioned options") {
  SubjectSpec spec = demo_subject();
  std::map<std::string, FinalResult> truth = ts::demo_truth(spec.space);
  std::vector<HistogramRow> rows = length_histogram(truth);
  // Lengths: true=0, x&&y=2, L1=3, L2=2, L4=2, L5=4.
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].length == 0);
  CHECK(rows[0].locations == 1);
  CHECK(rows[1].length == 2);
  CHECK(rows[1].locations == 3);
  CHECK(rows[1].interactions == 3);
  CHECK(rows[2].length == 3);
  CHECK(rows[3].length == 4);
}

TEST_CASE("median and SIQR") {
  CHECK(median({3, 1, 2}) == doctest::Approx(2.0));
  CHECK(median({4, 1, 2, 3}) == doctest::Approx(2.5));
  CHECK(median({}) == doctest::Approx(0.0));
  CHECK(siqr({1, 1, 1, 1}) == doctest::Approx(0.0));
  CHECK(siqr({1}) == doctest::Approx(0.0));
  // 21 evenly spaced values 0..20: quartiles 5 and 15, SIQR 5.
  std::vector<double> values;
  for (int i = 0; i <= 20; ++i) values.push_back(i);
  CHECK(siqr(values) == doctest::Approx(5.0));
}

TEST_CASE("trajectories climb early") {
  // Within the first half of the iterations the f-score against the
  // exhaustive run should already be high for most seeds.
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  InferenceResult exact = exhaustive_infer(oracle, spec.space);
  int early = 0;
  for (std::uint64_t seed = 1; seed <= 21; ++seed) {
    InferenceParams params;
    params.seed = seed;
    InferenceResult result = run(oracle, spec.space, params);
    for (const TrajectoryPoint& point : convergence_trajectory(result, exact.interactions)) {
      if (point.normalized_x <= 0.5 && point.score >= 0.8) {
        ++early;
        break;
      }
    }
  }
  CHECK(early >= 15);
}

TEST_CASE("f_score is symmetric for identical location sets") {
  ConfigSpace space({{"a", {"0", "1"}}, {"b", {"0", "1"}}, {"c", {"0", "1", "2"}}});
  auto results = [&](const std::string& one, const std::string& two) {
    std::map<std::string, FinalResult> out;
    out.emplace("L0", parse_final_result(space, one));
    out.emplace("L1", parse_final_result(space, two));
    return out;
  };
  std::map<std::string, FinalResult> left = results("a && b", "a || c in {0,2}");
  std::map<std::string, FinalResult> right = results("a && b && c in {1}", "a");
  CHECK(f_score(space, left, right).f_score ==
        doctest::Approx(f_score(space, right, left).f_score));
}
