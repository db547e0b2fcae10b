#ifndef COVINFER_JSON_IO_HPP
#define COVINFER_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "covinfer/config_space.hpp"
#include "covinfer/oracle.hpp"

namespace covinfer {

struct InferenceResult;
struct EvalReport;
struct MinCoverResult;

/// Space documents: {"options":[{"name":"x","values":["0","1"]},...],
/// "default":{"x":"1",...}?}. Unknown fields are rejected.
nlohmann::json space_to_json(const ConfigSpace& space);
ConfigSpace space_from_json(const nlohmann::json& doc);

SubjectSpec subject_from_json(const nlohmann::json& doc);
RunnerSpec runner_from_json(const nlohmann::json& doc, const std::string& base_dir);

nlohmann::json result_to_json(const InferenceResult& result);
InferenceResult result_from_json(const nlohmann::json& doc);

nlohmann::json report_to_json(const EvalReport& report);
nlohmann::json mincover_to_json(const ConfigSpace& space, const MinCoverResult& result);

/// Canonical document text: 2-space indent, sorted keys, trailing newline.
std::string dump_document(const nlohmann::json& doc);

nlohmann::json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace covinfer

#endif
