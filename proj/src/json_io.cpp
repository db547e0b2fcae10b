#include "covinfer/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "covinfer/evaluation.hpp"
#include "covinfer/inference.hpp"

namespace covinfer {

namespace {

void expect_fields(const nlohmann::json& doc, std::initializer_list<const char*> allowed,
                   const std::string& context) {
  if (!doc.is_object()) {
    throw ValidationError(context + " must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* field : allowed) {
      if (key == field) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError(context + " has unknown field \"" + key + "\"");
    }
  }
}

void require_field(const nlohmann::json& doc, const char* field, const std::string& context) {
  if (!doc.contains(field)) {
    throw ValidationError(context + " is missing field \"" + std::string(field) + "\"");
  }
}

}  // namespace

nlohmann::json space_to_json(const ConfigSpace& space) {
  nlohmann::json options = nlohmann::json::array();
  for (const OptionDomain& option : space.options()) {
    nlohmann::json entry;
    entry["name"] = option.name;
    entry["values"] = option.values;
    options.push_back(std::move(entry));
  }
  nlohmann::json doc;
  doc["options"] = std::move(options);
  if (space.default_config().has_value()) {
    nlohmann::json assignment;
    for (OptionIndex i = 0; i < space.option_count(); ++i) {
      assignment[space.option(i).name] =
          space.option(i).values.at(space.default_config()->value_at(i));
    }
    doc["default"] = std::move(assignment);
  }
  return doc;
}

ConfigSpace space_from_json(const nlohmann::json& doc) {
  expect_fields(doc, {"options", "default"}, "space");
  require_field(doc, "options", "space");
  if (!doc["options"].is_array()) {
    throw ValidationError("space \"options\" must be an array");
  }
  std::vector<OptionDomain> options;
  for (const nlohmann::json& entry : doc["options"]) {
    expect_fields(entry, {"name", "values"}, "space option");
    require_field(entry, "name", "space option");
    require_field(entry, "values", "space option");
    OptionDomain option;
    option.name = entry["name"].get<std::string>();
    for (const nlohmann::json& value : entry["values"]) {
      option.values.push_back(value.get<std::string>());
    }
    options.push_back(std::move(option));
  }
  ConfigSpace space(std::move(options));
  if (doc.contains("default")) {
    std::map<std::string, std::string> assignment;
    for (const auto& [name, value] : doc["default"].items()) {
      assignment[name] = value.get<std::string>();
    }
    space.set_default_config(assignment);
  }
  return space;
}

SubjectSpec subject_from_json(const nlohmann::json& doc) {
  expect_fields(doc, {"name", "space", "locations"}, "subject");
  require_field(doc, "space", "subject");
  require_field(doc, "locations", "subject");

  SubjectSpec spec;
  if (doc.contains("name")) spec.name = doc["name"].get<std::string>();
  spec.space = space_from_json(doc["space"]);

  std::vector<std::string> errors;
  std::set<std::string> ids;
  for (const nlohmann::json& entry : doc["locations"]) {
    try {
      expect_fields(entry, {"id", "guard"}, "location");
      require_field(entry, "id", "location");
      require_field(entry, "guard", "location");
      LocationSpec location;
      location.id = entry["id"].get<std::string>();
      location.guard_text = entry["guard"].get<std::string>();
      if (!ids.insert(location.id).second) {
        errors.push_back("duplicate location id '" + location.id + "'");
        continue;
      }
      try {
        location.guard = parse_formula(spec.space, location.guard_text);
      } catch (const ValidationError& e) {
        errors.push_back("location '" + location.id + "': " + e.what());
        continue;
      }
      spec.locations.push_back(std::move(location));
    } catch (const ValidationError& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::string message = "invalid subject:";
    for (const std::string& error : errors) message += "\n  - " + error;
    throw ValidationError(message);
  }
  return spec;
}

RunnerSpec runner_from_json(const nlohmann::json& doc, const std::string& base_dir) {
  expect_fields(doc,
                {"name", "space", "render", "tests", "coverage_sink", "working_dir",
                 "timeout_sec", "env"},
                "runner");
  require_field(doc, "space", "runner");
  require_field(doc, "render", "runner");
  require_field(doc, "tests", "runner");
  require_field(doc, "coverage_sink", "runner");

  RunnerSpec spec;
  if (doc.contains("name")) spec.name = doc["name"].get<std::string>();
  spec.space = space_from_json(doc["space"]);
  spec.coverage_sink = doc["coverage_sink"].get<std::string>();
  for (const nlohmann::json& test : doc["tests"]) {
    spec.test_commands.push_back(test.get<std::string>());
  }
  if (doc.contains("timeout_sec")) spec.timeout_sec = doc["timeout_sec"].get<double>();
  if (doc.contains("env")) {
    for (const auto& [key, value] : doc["env"].items()) {
      spec.env[key] = value.get<std::string>();
    }
  }
  std::filesystem::path working_dir(base_dir.empty() ? "." : base_dir);
  if (doc.contains("working_dir")) {
    std::filesystem::path given(doc["working_dir"].get<std::string>());
    working_dir = given.is_absolute() ? given : working_dir / given;
  }
  spec.working_dir = working_dir.string();

  std::vector<std::string> errors;
  for (const auto& [name, renderings] : doc["render"].items()) {
    if (spec.space.option_index(name) < 0) {
      errors.push_back("render entry for unknown option '" + name + "'");
      continue;
    }
    for (const auto& [value, fragments] : renderings.items()) {
      std::vector<std::string> argv;
      for (const nlohmann::json& fragment : fragments) {
        argv.push_back(fragment.get<std::string>());
      }
      spec.option_renderings[name][value] = std::move(argv);
    }
  }
  for (const OptionDomain& option : spec.space.options()) {
    auto it = spec.option_renderings.find(option.name);
    for (const std::string& value : option.values) {
      if (it == spec.option_renderings.end() || it->second.count(value) == 0) {
        errors.push_back("no rendering for option '" + option.name + "' value '" + value + "'");
      }
    }
  }
  if (spec.test_commands.empty()) errors.push_back("runner lists no tests");
  if (!(spec.timeout_sec > 0)) errors.push_back("timeout_sec must be positive");
  if (!errors.empty()) {
    std::string message = "invalid runner:";
    for (const std::string& error : errors) message += "\n  - " + error;
    throw ValidationError(message);
  }
  return spec;
}

nlohmann::json result_to_json(const InferenceResult& result) {
  nlohmann::json doc;
  doc["seed"] = result.seed;
  doc["iterations"] = result.iterations;
  doc["configs_used"] = result.configs_used;
  doc["space"] = space_to_json(result.space);

  nlohmann::json interactions = nlohmann::json::object();
  for (const auto& [location, interaction] : result.interactions) {
    interactions[location] = render(result.space, interaction, RenderStyle::Ascii);
  }
  doc["interactions"] = std::move(interactions);

  nlohmann::json history = nlohmann::json::array();
  for (const IterationRecord& record : result.history) {
    nlohmann::json entry;
    nlohmann::json new_configs = nlohmann::json::array();
    for (const Configuration& config : record.new_configs) {
      new_configs.push_back(canonical_config_string(result.space, config));
    }
    entry["new_configs"] = std::move(new_configs);
    nlohmann::json tuples = nlohmann::json::object();
    for (const auto& [location, digest] : record.tuple_digests) {
      tuples[location] = nlohmann::json{{"conj", digest[0]},
                                        {"disj", digest[1]},
                                        {"conjdisj", digest[2]},
                                        {"disjconj", digest[3]}};
    }
    entry["tuples"] = std::move(tuples);
    nlohmann::json provisional = nlohmann::json::object();
    for (const auto& [location, interaction] : record.provisional) {
      provisional[location] = render(result.space, interaction, RenderStyle::Ascii);
    }
    entry["interactions"] = std::move(provisional);
    history.push_back(std::move(entry));
  }
  doc["history"] = std::move(history);
  if (!result.warnings.empty()) doc["warnings"] = result.warnings;
  return doc;
}

InferenceResult result_from_json(const nlohmann::json& doc) {
  expect_fields(doc,
                {"seed", "iterations", "configs_used", "space", "interactions", "history",
                 "warnings"},
                "result");
  require_field(doc, "space", "result");
  require_field(doc, "interactions", "result");

  InferenceResult result;
  result.space = space_from_json(doc["space"]);
  if (doc.contains("seed")) result.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("iterations")) result.iterations = doc["iterations"].get<int>();
  if (doc.contains("configs_used")) result.configs_used = doc["configs_used"].get<std::size_t>();
  for (const auto& [location, text] : doc["interactions"].items()) {
    result.interactions.emplace(location,
                                parse_final_result(result.space, text.get<std::string>()));
  }
  if (doc.contains("history")) {
    for (const nlohmann::json& entry : doc["history"]) {
      IterationRecord record;
      if (entry.contains("new_configs")) {
        for (const nlohmann::json& text : entry["new_configs"]) {
          record.new_configs.push_back(
              parse_canonical_config(result.space, text.get<std::string>()));
        }
      }
      if (entry.contains("tuples")) {
        for (const auto& [location, digest] : entry["tuples"].items()) {
          record.tuple_digests.emplace(
              location, std::array<std::string, 4>{digest.value("conj", ""),
                                                   digest.value("disj", ""),
                                                   digest.value("conjdisj", ""),
                                                   digest.value("disjconj", "")});
        }
      }
      if (entry.contains("interactions")) {
        for (const auto& [location, text] : entry["interactions"].items()) {
          record.provisional.emplace(location,
                                     parse_final_result(result.space, text.get<std::string>()));
        }
      }
      result.history.push_back(std::move(record));
    }
  }
  if (doc.contains("warnings")) {
    for (const nlohmann::json& warning : doc["warnings"]) {
      result.warnings.push_back(warning.get<std::string>());
    }
  }
  return result;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["delta_cov"] = report.delta_cov;
  doc["f_score"] = report.f_score;
  nlohmann::json per_location = nlohmann::json::object();
  for (const auto& [location, score] : report.per_location) {
    per_location[location] = score;
  }
  doc["per_location"] = std::move(per_location);
  doc["missing_locations"] = report.missing_locations;
  return doc;
}

nlohmann::json mincover_to_json(const ConfigSpace& space, const MinCoverResult& result) {
  nlohmann::json doc;
  nlohmann::json configs = nlohmann::json::array();
  for (const Configuration& config : result.configs) {
    configs.push_back(canonical_config_string(space, config));
  }
  doc["configs"] = std::move(configs);
  doc["covered"] = result.covered;
  return doc;
}

std::string dump_document(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open '" + path + "'");
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write '" + path + "'");
  }
  out << text;
}

}  // namespace covinfer
