#include "covinfer/oracle.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "covinfer/json_io.hpp"

namespace covinfer {

std::set<std::string> synthetic_coverage(const SubjectSpec& spec, const Configuration& config) {
  std::set<std::string> out;
  for (const LocationSpec& location : spec.locations) {
    if (evaluate(location.guard, config)) out.insert(location.id);
  }
  return out;
}

CoverageCache::CoverageCache(std::string backing_file, bool fresh)
    : path_(std::move(backing_file)) {
  if (fresh) {
    std::ofstream truncate(path_, std::ios::trunc);
    return;
  }
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json entry = nlohmann::json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.contains("config") || !entry.contains("cov")) continue;
    std::set<std::string> locations;
    for (const auto& loc : entry["cov"]) locations.insert(loc.get<std::string>());
    entries_[entry["config"].get<std::string>()] = std::move(locations);
  }
}

std::optional<std::set<std::string>> CoverageCache::lookup(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CoverageCache::store(const std::string& key, const std::set<std::string>& locations) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!entries_.emplace(key, locations).second) return;
  if (path_.empty()) return;
  nlohmann::json entry;
  entry["config"] = key;
  entry["cov"] = locations;
  std::ofstream out(path_, std::ios::app);
  out << entry.dump() << '\n';
}

std::size_t CoverageCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string replace_all(std::string text, const std::string& needle, const std::string& with) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), with);
    pos += with.size();
  }
  return text;
}

struct CommandOutcome {
  int exit_code = 0;
  bool timed_out = false;
};

CommandOutcome run_shell_command(const std::string& command, const std::string& cwd,
                                 const std::map<std::string, std::string>& env,
                                 double timeout_sec) {
  pid_t pid = ::fork();
  if (pid < 0) {
    throw OracleError("fork failed for test command: " + command);
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // own process group so a timeout can kill the whole tree
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) _exit(126);
    for (const auto& [key, value] : env) {
      ::setenv(key.c_str(), value.c_str(), 1);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_sec));
  while (true) {
    int status = 0;
    pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) {
      CommandOutcome outcome;
      outcome.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
      return outcome;
    }
    if (done < 0) {
      throw OracleError("waitpid failed for test command: " + command);
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      CommandOutcome outcome;
      outcome.timed_out = true;
      return outcome;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

}  // namespace

std::set<std::string> parse_coverage_sink_text(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    out.insert(line.substr(start));
  }
  return out;
}

ExternalRunner::ExternalRunner(RunnerSpec spec, std::shared_ptr<CoverageCache> cache,
                               bool verify_determinism)
    : spec_(std::move(spec)), cache_(std::move(cache)), verify_(verify_determinism) {
  if (!cache_) cache_ = std::make_shared<CoverageCache>();
}

std::string ExternalRunner::opts_for(const Configuration& config) const {
  std::string out;
  for (OptionIndex i = 0; i < spec_.space.option_count(); ++i) {
    const OptionDomain& option = spec_.space.option(i);
    const std::string& value = option.values.at(config.value_at(i));
    const std::vector<std::string>& fragments = spec_.option_renderings.at(option.name).at(value);
    for (const std::string& fragment : fragments) {
      if (!out.empty()) out += ' ';
      out += fragment;
    }
  }
  return out;
}

std::string ExternalRunner::sink_path_for(const Configuration& config) const {
  std::string hash = fnv1a_hex(canonical_config_string(spec_.space, config));
  std::string sink = replace_all(spec_.coverage_sink, "{HASH}", hash);
  std::filesystem::path path(sink);
  if (path.is_relative() && !spec_.working_dir.empty()) {
    path = std::filesystem::path(spec_.working_dir) / path;
  }
  return path.string();
}

std::size_t ExternalRunner::spawn_count() const {
  std::lock_guard<std::mutex> lock(spawn_mutex_);
  return spawns_;
}

std::set<std::string> ExternalRunner::coverage(const Configuration& config) {
  const std::string key = canonical_config_string(spec_.space, config);
  if (auto cached = cache_->lookup(key)) {
    return *cached;
  }
  std::set<std::string> covered = run_tests(config, key);
  if (verify_) {
    // Memoization is only sound for deterministic coverage; a second run must
    // reproduce the first exactly.
    std::set<std::string> again = run_tests(config, key);
    if (again != covered) {
      throw OracleError("coverage is nondeterministic for configuration [" + key +
                        "]: repeat run differs");
    }
  }
  cache_->store(key, covered);
  return covered;
}

std::set<std::string> ExternalRunner::run_tests(const Configuration& config,
                                                const std::string& key) {
  const std::string opts = opts_for(config);
  const std::string sink = sink_path_for(config);
  std::set<std::string> covered;
  for (const std::string& test_template : spec_.test_commands) {
    std::string command = replace_all(test_template, "{OPTS}", opts);
    command = replace_all(command, "{SINK}", sink);
    std::error_code ec;
    std::filesystem::remove(sink, ec);  // never read a stale sink
    {
      std::lock_guard<std::mutex> lock(spawn_mutex_);
      ++spawns_;
    }
    std::map<std::string, std::string> env = spec_.env;
    env["COVINFER_SINK"] = sink;
    CommandOutcome outcome = run_shell_command(command, spec_.working_dir, env, spec_.timeout_sec);
    if (outcome.timed_out) {
      throw OracleError("test timed out after " + std::to_string(spec_.timeout_sec) +
                        "s for configuration [" + key + "]: " + command);
    }
    // Nonzero exits are tolerated: tests may legitimately fail under a
    // configuration. Only a missing sink is fatal.
    std::ifstream in(sink);
    if (!in) {
      throw OracleError("coverage sink '" + sink + "' missing after running test for "
                        "configuration [" + key + "]: " + command);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::set<std::string> from_test = parse_coverage_sink_text(buffer.str());
    covered.insert(from_test.begin(), from_test.end());
  }
  return covered;
}

std::variant<SubjectSpec, RunnerSpec> load_subject(const std::string& path) {
  nlohmann::json doc = load_json_file(path);
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  if (doc.contains("locations")) {
    SubjectSpec spec = subject_from_json(doc);
    if (spec.name.empty()) spec.name = std::filesystem::path(path).stem().string();
    return spec;
  }
  if (doc.contains("tests")) {
    RunnerSpec spec = runner_from_json(doc, base_dir);
    if (spec.name.empty()) spec.name = std::filesystem::path(path).stem().string();
    return spec;
  }
  throw ValidationError("subject file '" + path +
                        "' has neither \"locations\" (subject) nor \"tests\" (runner)");
}

const char* demo_subject_json() {
  return R"json({
  "name": "demo7",
  "space": {
    "options": [
      {"name": "s", "values": ["0", "1"]},
      {"name": "t", "values": ["0", "1"]},
      {"name": "u", "values": ["0", "1"]},
      {"name": "v", "values": ["0", "1"]},
      {"name": "x", "values": ["0", "1"]},
      {"name": "y", "values": ["0", "1"]},
      {"name": "z", "values": ["0", "1", "2", "3", "4"]}
    ]
  },
  "locations": [
    {"id": "L0", "guard": "x && y"},
    {"id": "L1", "guard": "x && y && z in {0,3,4}"},
    {"id": "L2", "guard": "!x || !y"},
    {"id": "L3", "guard": "true"},
    {"id": "L4", "guard": "u && v"},
    {"id": "L5", "guard": "u && v && (s || t)"}
  ]
})json";
}

SubjectSpec demo_subject() {
  return subject_from_json(nlohmann::json::parse(demo_subject_json()));
}

}  // namespace covinfer
