// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "popsweeper/error.hpp"
#include "popsweeper/inference_backend.hpp"

namespace popsweeper {

using nlohmann::json;

namespace {

double probability(const json& value, const char* field) {
  const double p = value.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kModelLoadFailure,
                std::string("oracle ") + field + " outside [0, 1]");
  }
  return p;
}

OracleEntry parse_entry(const json& node, const OracleEntry& fallback) {
  OracleEntry entry = fallback;
  if (node.contains("primary")) entry.primary = probability(node["primary"], "primary");
  if (node.contains("secondary")) {
    entry.secondary = probability(node["secondary"], "secondary");
  }
  if (node.contains("detections")) {
    entry.detections.clear();
    for (const auto& row : node["detections"]) {
      if (!row.is_array() || row.size() != 5) {
        throw Error(ErrorCode::kModelLoadFailure,
                    "oracle detection rows are [x1, y1, x2, y2, conf]");
      }
      entry.detections.push_back(
          {{row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
            row[3].get<double>()},
           probability(row[4], "confidence")});
    }
  }
  return entry;
}

json entry_to_json(const OracleEntry& entry) {
  json rows = json::array();
  for (const auto& d : entry.detections) {
    rows.push_back({d.box.x1, d.box.y1, d.box.x2, d.box.y2, d.confidence});
  }
  return {{"primary", entry.primary},
          {"secondary", entry.secondary},
          {"detections", std::move(rows)}};
}

class ScriptedOracleBackend final : public InferenceBackend {
 public:
  ScriptedOracleBackend(std::shared_ptr<const OracleScript> script,
                        OracleField field, BackendTask task)
      : script_(std::move(script)), field_(field), task_(task) {}

  BackendKind kind() const noexcept override { return BackendKind::kScriptedOracle; }
  BackendTask task() const noexcept override { return task_; }

 protected:
  double do_classify(const InferenceInput& input) const override {
    const OracleEntry& entry = script_->lookup(input.frame);
    return field_ == OracleField::kPrimary ? entry.primary : entry.secondary;
  }

  std::vector<Detection> do_detect(const InferenceInput& input) const override {
    return script_->lookup(input.frame).detections;
  }

 private:
  std::shared_ptr<const OracleScript> script_;
  OracleField field_;
  BackendTask task_;
};

}  // namespace

const OracleEntry& OracleScript::lookup(const Frame& frame) const {
  if (!by_hash.empty()) {
    if (auto it = by_hash.find(content_sha256(frame)); it != by_hash.end()) {
      return it->second;
    }
  }
  if (auto it = by_frame_id.find(frame.frame_id()); it != by_frame_id.end()) {
    return it->second;
  }
  return defaults;
}

OracleScript OracleScript::parse(const std::string& json_text) {
  OracleScript script;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) {
      throw Error(ErrorCode::kModelLoadFailure, "oracle script must be an object");
    }
    if (doc.contains("defaults")) {
      script.defaults = parse_entry(doc["defaults"], OracleEntry{});
    }
    if (doc.contains("frames")) {
      for (const auto& [key, node] : doc["frames"].items()) {
        script.by_hash.emplace(key, parse_entry(node, script.defaults));
      }
    }
    if (doc.contains("frame_ids")) {
      for (const auto& [key, node] : doc["frame_ids"].items()) {
        script.by_frame_id.emplace(std::stoll(key),
                                   parse_entry(node, script.defaults));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kModelLoadFailure, e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kModelLoadFailure,
                std::string("bad frame_ids key: ") + e.what());
  }
  return script;
}

OracleScript OracleScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kModelLoadFailure, path.string() + " not found");
  std::stringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string OracleScript::dump() const {
  json frames = json::object();
  for (const auto& [hash, entry] : by_hash) frames[hash] = entry_to_json(entry);
  json doc = {{"defaults", entry_to_json(defaults)}, {"frames", std::move(frames)}};
  if (!by_frame_id.empty()) {
    json ids = json::object();
    for (const auto& [id, entry] : by_frame_id) {
      ids[std::to_string(id)] = entry_to_json(entry);
    }
    doc["frame_ids"] = std::move(ids);
  }
  return doc.dump(1);
}

std::shared_ptr<const InferenceBackend> make_oracle_backend(
    std::shared_ptr<const OracleScript> script, OracleField field,
    BackendTask task) {
  const BackendTask expected = field == OracleField::kDetections
                                   ? BackendTask::kDetect
                                   : BackendTask::kBinaryClassify;
  if (task != expected) {
    throw Error(ErrorCode::kTaskShapeMismatch,
                "oracle field does not produce " + std::string(to_string(task)) +
                    " outputs");
  }
  if (!script) throw Error(ErrorCode::kModelLoadFailure, "null oracle script");
  return std::make_shared<ScriptedOracleBackend>(std::move(script), field, task);
}

}  // namespace popsweeper
