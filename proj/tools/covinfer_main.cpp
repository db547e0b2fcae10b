#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "covinfer/evaluation.hpp"
#include "covinfer/inference.hpp"
#include "covinfer/json_io.hpp"
#include "covinfer/oracle.hpp"

using namespace covinfer;

namespace {

enum class Format { Json, Text, Csv };

std::uint64_t generate_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

struct LoadedOracle {
  ConfigSpace space;
  std::string name;
  std::unique_ptr<CoverageOracle> oracle;
};

LoadedOracle make_oracle(const std::string& subject_path, const std::string& cache_dir,
                         bool fresh_cache, bool verify_oracle = false) {
  LoadedOracle loaded;
  auto spec = load_subject(subject_path);
  if (std::holds_alternative<SubjectSpec>(spec)) {
    SubjectSpec& subject = std::get<SubjectSpec>(spec);
    loaded.space = subject.space;
    loaded.name = subject.name;
    loaded.oracle = std::make_unique<SyntheticOracle>(std::move(subject));
    return loaded;
  }
  RunnerSpec& runner = std::get<RunnerSpec>(spec);
  loaded.space = runner.space;
  loaded.name = runner.name;

  std::string dir = cache_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("COVINFER_CACHE_DIR")) dir = env;
  }
  if (dir.empty()) dir = runner.working_dir.empty() ? "." : runner.working_dir;
  std::filesystem::create_directories(dir);
  std::string cache_file =
      (std::filesystem::path(dir) / (loaded.name + ".cache.jsonl")).string();
  auto cache = std::make_shared<CoverageCache>(cache_file, fresh_cache);
  loaded.oracle =
      std::make_unique<ExternalRunner>(std::move(runner), std::move(cache), verify_oracle);
  return loaded;
}

void emit(const nlohmann::json& doc, const std::string& out_path, Format format,
          const std::string& text) {
  if (!out_path.empty()) {
    write_text_file(out_path, dump_document(doc));
  }
  if (format == Format::Json) {
    std::cout << dump_document(doc);
  } else {
    std::cout << text;
  }
}

struct InteractionCounts {
  std::size_t conj = 0;
  std::size_t disj = 0;
  std::size_t mixed = 0;
  std::size_t trivially_true = 0;
};

InteractionCounts count_kinds(const std::map<std::string, FinalResult>& interactions) {
  InteractionCounts counts;
  for (const auto& [location, result] : interactions) {
    if (result.is_true()) {
      ++counts.trivially_true;
    } else if (result.parts.size() > 1) {
      ++counts.mixed;
    } else {
      switch (result.parts.front().kind()) {
        case InteractionKind::Conj:
          ++counts.conj;
          break;
        case InteractionKind::Disj:
          ++counts.disj;
          break;
        default:
          ++counts.mixed;
          break;
      }
    }
  }
  return counts;
}

std::string result_text(const InferenceResult& result, const std::string& name) {
  std::ostringstream out;
  out << "seed: " << result.seed << "\n";
  if (!name.empty()) out << "subject: " << name << "\n";
  out << "iterations: " << result.iterations << "\n";
  out << "configs used: " << result.configs_used << " of " << result.space.space_size_decimal()
      << "\n";
  InteractionCounts counts = count_kinds(result.interactions);
  out << "interactions (conj " << counts.conj << ", disj " << counts.disj << ", mixed "
      << counts.mixed << ", true " << counts.trivially_true << "):\n";
  for (const auto& [location, interaction] : result.interactions) {
    out << "  " << location << ": " << render(result.space, interaction) << "\n";
  }
  for (const std::string& warning : result.warnings) {
    out << "warning: " << warning << "\n";
  }
  return out.str();
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "delta cov: " << report.delta_cov << "\n";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", report.f_score);
  out << "f-score: " << buffer << "\n";
  out << "per location:\n";
  for (const auto& [location, score] : report.per_location) {
    std::snprintf(buffer, sizeof buffer, "%.4f", score);
    out << "  " << location << "  " << buffer << "\n";
  }
  if (!report.missing_locations.empty()) {
    out << "missing locations:\n";
    for (const std::string& location : report.missing_locations) {
      out << "  " << location << "\n";
    }
  }
  return out.str();
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& trajectory) {
  std::ostringstream out;
  out << "iteration,normalized_x,f_score\n";
  for (const TrajectoryPoint& point : trajectory) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%d,%.6f,%.6f", point.iteration, point.normalized_x,
                  point.score);
    out << buffer << "\n";
  }
  return out.str();
}

void print_seed_notice(Format format, std::uint64_t seed) {
  // The effective seed is always printed; in json/csv modes it goes to stderr
  // so stdout stays a clean document.
  if (format == Format::Text) {
    return;  // the text renderers lead with it
  }
  std::cerr << "seed: " << seed << "\n";
}

int cmd_infer(const std::string& subject_path, std::optional<std::uint64_t> seed_opt,
              const std::string& out_path, Format format, int repeats, int max_iterations,
              int streak, std::uint64_t implication_cap, bool no_default, bool fresh,
              int jobs, const std::string& cache_dir, bool verify_oracle) {
  LoadedOracle loaded = make_oracle(subject_path, cache_dir, fresh, verify_oracle);
  const std::uint64_t seed = seed_opt.value_or(generate_seed());
  print_seed_notice(format, seed);

  InferenceParams params;
  params.seed = seed;
  params.max_iterations = max_iterations;
  params.stability_streak = streak;
  params.implication_cap = implication_cap;
  params.include_default = !no_default;
  params.jobs = jobs;

  if (repeats <= 1) {
    InferenceResult result = run(*loaded.oracle, loaded.space, params);
    emit(result_to_json(result), out_path, format, result_text(result, loaded.name));
    return 0;
  }

  // Independent runs under seeds seed .. seed+repeats-1, summarized by median
  // and semi-interquartile range.
  std::vector<double> configs, iterations, totals;
  nlohmann::json runs = nlohmann::json::array();
  for (int i = 0; i < repeats; ++i) {
    InferenceParams one = params;
    one.seed = seed + static_cast<std::uint64_t>(i);
    InferenceResult result = run(*loaded.oracle, loaded.space, one);
    InteractionCounts counts = count_kinds(result.interactions);
    configs.push_back(static_cast<double>(result.configs_used));
    iterations.push_back(static_cast<double>(result.iterations));
    totals.push_back(static_cast<double>(counts.conj + counts.disj + counts.mixed));
    nlohmann::json entry;
    entry["seed"] = one.seed;
    entry["configs_used"] = result.configs_used;
    entry["iterations"] = result.iterations;
    entry["locations"] = result.interactions.size();
    entry["conj"] = counts.conj;
    entry["disj"] = counts.disj;
    entry["mixed"] = counts.mixed;
    entry["true"] = counts.trivially_true;
    runs.push_back(std::move(entry));
  }
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["repeats"] = repeats;
  doc["configs_used"] = {{"median", median(configs)}, {"siqr", siqr(configs)}};
  doc["iterations"] = {{"median", median(iterations)}, {"siqr", siqr(iterations)}};
  doc["interactions"] = {{"median", median(totals)}, {"siqr", siqr(totals)}};
  doc["runs"] = std::move(runs);

  std::ostringstream text;
  text << "seed: " << seed << "\n";
  text << "repeats: " << repeats << "\n";
  text << "configs used: median " << median(configs) << " siqr " << siqr(configs) << "\n";
  text << "iterations: median " << median(iterations) << " siqr " << siqr(iterations) << "\n";
  text << "interactions: median " << median(totals) << " siqr " << siqr(totals) << "\n";
  emit(doc, out_path, format, text.str());
  return 0;
}

int cmd_exhaustive(const std::string& subject_path, std::optional<std::uint64_t> seed_opt,
                   const std::string& out_path, Format format, std::uint64_t cap, bool fresh,
                   const std::string& cache_dir) {
  LoadedOracle loaded = make_oracle(subject_path, cache_dir, fresh);
  const std::uint64_t seed = seed_opt.value_or(generate_seed());
  print_seed_notice(format, seed);
  InferenceResult result = exhaustive_infer(*loaded.oracle, loaded.space, cap, seed);
  emit(result_to_json(result), out_path, format, result_text(result, loaded.name));
  return 0;
}

int cmd_compare(const std::string& inferred_path, const std::string& exact_path,
                const std::string& out_path, Format format,
                const std::string& trajectory_path) {
  InferenceResult inferred = result_from_json(load_json_file(inferred_path));
  InferenceResult exact = result_from_json(load_json_file(exact_path));
  if (!(inferred.space == exact.space)) {
    throw ValidationError("result documents describe different configuration spaces");
  }
  EvalReport report = f_score(inferred.space, inferred.interactions, exact.interactions);
  if (!trajectory_path.empty()) {
    write_text_file(trajectory_path,
                    trajectory_csv(convergence_trajectory(inferred, exact.interactions)));
  }
  emit(report_to_json(report), out_path, format, report_text(report));
  return 0;
}

int cmd_mincover(const std::string& subject_path, const std::string& result_path,
                 std::optional<std::uint64_t> seed_opt, const std::string& out_path,
                 Format format, int draws, std::uint64_t cap) {
  LoadedOracle loaded = make_oracle(subject_path, "", false);
  InferenceResult result = result_from_json(load_json_file(result_path));
  if (!(result.space == loaded.space)) {
    throw ValidationError("result document does not match the subject's configuration space");
  }
  const std::uint64_t seed = seed_opt.value_or(generate_seed());
  print_seed_notice(format, seed);
  MinCoverResult cover = min_cover_best_of(loaded.space, result.interactions, seed, draws, cap);

  std::ostringstream text;
  text << "seed: " << seed << "\n";
  text << "configurations (" << cover.configs.size() << "):\n";
  for (const Configuration& config : cover.configs) {
    text << "  " << canonical_config_string(loaded.space, config) << "\n";
  }
  text << "covered interactions: " << cover.covered.size() << " of "
       << result.interactions.size() << "\n";
  nlohmann::json doc = mincover_to_json(loaded.space, cover);
  doc["seed"] = seed;
  doc["draws"] = draws;
  emit(doc, out_path, format, text.str());
  return 0;
}

int cmd_histogram(const std::string& result_path, const std::string& out_path, Format format) {
  InferenceResult result = result_from_json(load_json_file(result_path));
  std::vector<HistogramRow> rows = length_histogram(result.interactions);
  nlohmann::json doc = nlohmann::json::array();
  std::ostringstream text;
  std::ostringstream csv;
  text << "length  interactions  locations\n";
  csv << "length,interactions,locations\n";
  for (const HistogramRow& row : rows) {
    nlohmann::json entry;
    entry["length"] = row.length;
    entry["interactions"] = row.interactions;
    entry["locations"] = row.locations;
    doc.push_back(std::move(entry));
    char line[80];
    std::snprintf(line, sizeof line, "%-7zu %-13zu %zu\n", row.length, row.interactions,
                  row.locations);
    text << line;
    csv << row.length << ',' << row.interactions << ',' << row.locations << '\n';
  }
  if (format == Format::Csv) {
    if (!out_path.empty()) write_text_file(out_path, csv.str());
    std::cout << csv.str();
    return 0;
  }
  emit(doc, out_path, format, text.str());
  return 0;
}

int cmd_demo(std::optional<std::uint64_t> seed_opt) {
  SubjectSpec spec = demo_subject();
  SyntheticOracle oracle(spec);
  const std::uint64_t seed = seed_opt.value_or(generate_seed());
  std::cout << "seed: " << seed << "\n";
  std::cout << "subject: " << spec.name << " (" << spec.space.option_count() << " options, "
            << spec.space.space_size_decimal() << " configurations)\n\n";

  InferenceParams params;
  params.seed = seed;
  InferenceResult result = run(oracle, spec.space, params);

  auto print_batch = [&](const std::vector<Configuration>& batch) {
    std::cout << "  ";
    for (const OptionDomain& option : spec.space.options()) std::cout << option.name << ' ';
    std::cout << "  coverage\n";
    for (const Configuration& config : batch) {
      std::cout << "  ";
      for (OptionIndex o = 0; o < spec.space.option_count(); ++o) {
        std::cout << spec.space.option(o).values.at(config.value_at(o)) << ' ';
      }
      std::cout << "  ";
      bool first = true;
      for (const std::string& location : oracle.coverage(config)) {
        if (!first) std::cout << ',';
        first = false;
        std::cout << location;
      }
      std::cout << "\n";
    }
  };

  std::cout << "initial covering array:\n";
  print_batch(result.history.front().new_configs);
  if (result.history.size() > 1 && !result.history[1].new_configs.empty()) {
    std::cout << "\nfirst refinement batch (mutations of one selected interaction):\n";
    print_batch(result.history[1].new_configs);
  }

  std::cout << "\nconverged after " << result.iterations << " iterations using "
            << result.configs_used << " of " << spec.space.space_size_decimal()
            << " configurations\n";
  std::cout << "final interactions:\n";
  for (const auto& [location, interaction] : result.interactions) {
    std::cout << "  " << location << ": " << render(spec.space, interaction) << "\n";
  }

  InferenceResult exact = exhaustive_infer(oracle, spec.space, kDefaultEnumerationCap, seed);
  EvalReport report = f_score(spec.space, result.interactions, exact.interactions);
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", report.f_score);
  std::cout << "\nagainst the exhaustive run (all 320 configurations): f-score " << buffer
            << ", delta cov " << report.delta_cov << "\n";

  MinCoverResult cover = min_cover_best_of(spec.space, exact.interactions, seed, 10);
  std::cout << "\nminimal covering configurations (" << cover.configs.size() << "):\n";
  for (const Configuration& config : cover.configs) {
    std::cout << "  " << canonical_config_string(spec.space, config) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infers configuration interactions from coverage data"};
  app.require_subcommand(1);

  std::string subject_path, result_path, exact_path, out_path, cache_dir, trajectory_path;
  std::string format_name = "text";
  std::uint64_t seed_value = 0;
  std::uint64_t cap = kDefaultEnumerationCap;
  std::uint64_t implication_cap = kDefaultImplicationCap;
  int repeats = 1, max_iterations = 100, streak = 12, jobs = 1, draws = 10;
  bool fresh = false, no_default = false, verify_oracle = false;

  auto add_format = [&](CLI::App* cmd, bool with_csv) {
    std::vector<std::string> allowed = {"json", "text"};
    if (with_csv) allowed.push_back("csv");
    cmd->add_option("--format", format_name, "Output format on stdout")
        ->check(CLI::IsMember(allowed));
  };

  CLI::App* infer = app.add_subcommand("infer", "Iteratively infer interactions for a subject");
  infer->add_option("subject", subject_path, "Subject or runner document")->required();
  CLI::Option* infer_seed = infer->add_option("--seed", seed_value, "Random seed");
  infer->add_option("--out", out_path, "Write the result document here");
  infer->add_option("--repeats", repeats, "Independent runs; reports median and SIQR")
      ->check(CLI::PositiveNumber);
  infer->add_option("--max-iterations", max_iterations, "Iteration safety valve")
      ->check(CLI::PositiveNumber);
  infer->add_option("--streak", streak, "Unchanged iterations required to accept the fix-point")
      ->check(CLI::PositiveNumber);
  infer->add_option("--implication-cap", implication_cap,
                    "Assignment cap for implication checks");
  infer->add_flag("--no-default", no_default, "Do not seed with the default configuration");
  infer->add_flag("--fresh", fresh, "Discard any cached coverage");
  infer->add_option("--jobs", jobs, "Concurrent oracle processes")->check(CLI::PositiveNumber);
  infer->add_option("--cache-dir", cache_dir, "Coverage cache directory");
  infer->add_flag("--verify-oracle", verify_oracle,
                  "Run each configuration twice and abort on differing coverage");
  add_format(infer, false);

  CLI::App* exhaustive = app.add_subcommand("exhaustive", "One pass over every configuration");
  exhaustive->add_option("subject", subject_path, "Subject or runner document")->required();
  CLI::Option* exhaustive_seed = exhaustive->add_option("--seed", seed_value, "Recorded seed");
  exhaustive->add_option("--out", out_path, "Write the result document here");
  exhaustive->add_option("--cap", cap, "Refuse spaces larger than this");
  exhaustive->add_flag("--fresh", fresh, "Discard any cached coverage");
  exhaustive->add_option("--cache-dir", cache_dir, "Coverage cache directory");
  add_format(exhaustive, false);

  CLI::App* compare = app.add_subcommand("compare", "Score one result document against another");
  compare->add_option("inferred", result_path, "Inferred result document")->required();
  compare->add_option("exact", exact_path, "Reference result document")->required();
  compare->add_option("--out", out_path, "Write the report document here");
  compare->add_option("--trajectory", trajectory_path,
                      "Write per-iteration f-score CSV (needs history)");
  add_format(compare, false);

  CLI::App* mincover =
      app.add_subcommand("mincover", "Greedy minimal covering configurations from a result");
  mincover->add_option("subject", subject_path, "Subject or runner document")->required();
  mincover->add_option("result", result_path, "Result document with interactions")->required();
  CLI::Option* mincover_seed = mincover->add_option("--seed", seed_value, "Random seed");
  mincover->add_option("--draws", draws, "Greedy draws; the smallest cover wins")
      ->check(CLI::PositiveNumber);
  mincover->add_option("--out", out_path, "Write the cover document here");
  add_format(mincover, false);

  CLI::App* demo = app.add_subcommand("demo", "Walk through the bundled seven-option example");
  CLI::Option* demo_seed = demo->add_option("--seed", seed_value, "Random seed");

  CLI::App* histogram =
      app.add_subcommand("histogram", "Interaction length vs covered locations");
  histogram->add_option("result", result_path, "Result document")->required();
  histogram->add_option("--out", out_path, "Write the table here");
  add_format(histogram, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto seed_of = [&](CLI::Option* option) -> std::optional<std::uint64_t> {
    if (option != nullptr && option->count() > 0) return seed_value;
    return std::nullopt;
  };
  Format format = format_name == "json"  ? Format::Json
                  : format_name == "csv" ? Format::Csv
                                         : Format::Text;

  try {
    if (infer->parsed()) {
      return cmd_infer(subject_path, seed_of(infer_seed), out_path, format, repeats,
                       max_iterations, streak, implication_cap, no_default, fresh, jobs,
                       cache_dir, verify_oracle);
    }
    if (exhaustive->parsed()) {
      return cmd_exhaustive(subject_path, seed_of(exhaustive_seed), out_path, format, cap, fresh,
                            cache_dir);
    }
    if (compare->parsed()) {
      return cmd_compare(result_path, exact_path, out_path, format, trajectory_path);
    }
    if (mincover->parsed()) {
      return cmd_mincover(subject_path, result_path, seed_of(mincover_seed), out_path, format,
                          draws, implication_cap);
    }
    if (demo->parsed()) {
      return cmd_demo(seed_of(demo_seed));
    }
    if (histogram->parsed()) {
      return cmd_histogram(result_path, out_path, format);
    }
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
