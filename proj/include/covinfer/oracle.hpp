#ifndef COVINFER_ORACLE_HPP
#define COVINFER_ORACLE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "covinfer/config_space.hpp"
#include "covinfer/formula.hpp"

namespace covinfer {

/// Maps a configuration to the locations the test suite covers under it.
/// Implementations must be deterministic per configuration for the duration
/// of a run (memoization soundness) and safe to call concurrently for
/// distinct configurations.
class CoverageOracle {
 public:
  virtual ~CoverageOracle() = default;
  virtual std::set<std::string> coverage(const Configuration& config) = 0;
};

struct LocationSpec {
  std::string id;
  FormulaAst guard;
  std::string guard_text;
};

/// A synthetic subject: locations guarded by formulas over the options.
struct SubjectSpec {
  std::string name;
  ConfigSpace space;
  std::vector<LocationSpec> locations;
};

/// Locations whose guard evaluates true under the configuration.
std::set<std::string> synthetic_coverage(const SubjectSpec& spec, const Configuration& config);

class SyntheticOracle : public CoverageOracle {
 public:
  explicit SyntheticOracle(SubjectSpec spec) : spec_(std::move(spec)) {}
  std::set<std::string> coverage(const Configuration& config) override {
    return synthetic_coverage(spec_, config);
  }
  const SubjectSpec& spec() const { return spec_; }

 private:
  SubjectSpec spec_;
};

/// Drives a real test suite: how option values render to command-line
/// fragments, which commands to run, and where each run leaves its covered
/// locations. Command templates may use {OPTS} (the rendered option
/// fragments) and {SINK} (the per-configuration coverage sink path).
struct RunnerSpec {
  std::string name;
  ConfigSpace space;
  // option name -> value token -> argument fragments (possibly empty)
  std::map<std::string, std::map<std::string, std::vector<std::string>>> option_renderings;
  std::vector<std::string> test_commands;
  std::string coverage_sink;  // path template; {HASH} expands per configuration
  std::string working_dir;
  double timeout_sec = 30.0;
  std::map<std::string, std::string> env;
};

/// Persistent coverage memo keyed by canonical configuration string. The
/// backing file is JSON-lines and append-only during a run; writes are
/// serialized through one mutex.
class CoverageCache {
 public:
  CoverageCache() = default;
  CoverageCache(std::string backing_file, bool fresh);

  std::optional<std::set<std::string>> lookup(const std::string& key) const;
  void store(const std::string& key, const std::set<std::string>& locations);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::set<std::string>> entries_;
  std::string path_;
};

/// External-command coverage adapter with memoization. Test failures (nonzero
/// exits) are tolerated; a missing coverage sink or a timeout aborts with a
/// diagnostic naming the configuration and test.
class ExternalRunner : public CoverageOracle {
 public:
  ExternalRunner(RunnerSpec spec, std::shared_ptr<CoverageCache> cache,
                 bool verify_determinism = false);

  std::set<std::string> coverage(const Configuration& config) override;

  /// Number of processes spawned so far (cache hits spawn none).
  std::size_t spawn_count() const;

  /// The rendered {OPTS} string for a configuration; deterministic.
  std::string opts_for(const Configuration& config) const;
  /// The expanded coverage-sink path for a configuration.
  std::string sink_path_for(const Configuration& config) const;

  const RunnerSpec& spec() const { return spec_; }

 private:
  std::set<std::string> run_tests(const Configuration& config, const std::string& key);

  RunnerSpec spec_;
  std::shared_ptr<CoverageCache> cache_;
  bool verify_ = false;
  mutable std::mutex spawn_mutex_;
  std::size_t spawns_ = 0;
};

/// Parses and validates a subject or runner document, reporting all
/// validation errors at once. Runner working directories resolve relative to
/// the document's location.
std::variant<SubjectSpec, RunnerSpec> load_subject(const std::string& path);

std::set<std::string> parse_coverage_sink_text(const std::string& text);

/// The bundled seven-option demo subject.
const char* demo_subject_json();
SubjectSpec demo_subject();

}  // namespace covinfer

#endif
