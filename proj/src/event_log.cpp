// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/event_log.hpp"

#include <json.hpp>

#include "popsweeper/error.hpp"

namespace popsweeper {

using nlohmann::ordered_json;

std::string_view to_string(EngineAction action) {
  return action == EngineAction::kDismissPopup ? "click" : "continue";
}

std::string EngineEvent::to_json_line() const {
  ordered_json j;
  j["session"] = session;
  j["frame_id"] = frame_id;
  j["timestamp_ms"] = timestamp_ms;
  j["forwarded"] = forwarded;
  if (similarity) j["similarity"] = *similarity;
  if (verdict) {
    ordered_json v;
    v["label"] = to_string(verdict->label);
    v["primary"] = verdict->primary_score.probability;
    if (verdict->secondary_score) v["secondary"] = verdict->secondary_score->probability;
    v["policy"] = to_string(verdict->policy);
    j["verdict"] = std::move(v);
  }
  j["action"] = to_string(action);
  if (click) {
    j["x"] = click->x;
    j["y"] = click->y;
  }
  if (detection) {
    const auto& b = detection->box;
    j["box"] = {b.x1, b.y1, b.x2, b.y2};
    j["confidence"] = detection->confidence;
  }
  if (reference_reset) j["reference_reset"] = true;
  if (!note.empty()) j["note"] = note;
  if (!error.empty()) j["error"] = error;
  return j.dump();
}

EngineEvent EngineEvent::from_json_line(const std::string& line) {
  EngineEvent e;
  try {
    const auto j = ordered_json::parse(line);
    e.session = j.at("session").get<std::string>();
    e.frame_id = j.at("frame_id").get<std::int64_t>();
    e.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
    e.forwarded = j.value("forwarded", false);
    if (j.contains("similarity")) e.similarity = j["similarity"].get<double>();
    if (j.contains("verdict")) {
      const auto& v = j["verdict"];
      Verdict verdict;
      verdict.label = v.at("label").get<std::string>() == "popup" ? PopupLabel::kPopup
                                                                  : PopupLabel::kAppContent;
      verdict.primary_score = {v.at("primary").get<double>(), ClassifierStage::kPrimary};
      if (v.contains("secondary")) {
        verdict.secondary_score =
            ClassifierScore{v["secondary"].get<double>(), ClassifierStage::kSecondary};
      }
      if (auto policy = parse_fusion_policy(v.value("policy", "conjunctive"))) {
        verdict.policy = *policy;
      }
      e.verdict = verdict;
    }
    e.action = j.at("action").get<std::string>() == "click" ? EngineAction::kDismissPopup
                                                            : EngineAction::kContinue;
    if (j.contains("x")) e.click = ClickTarget{j["x"].get<double>(), j["y"].get<double>()};
    if (j.contains("box")) {
      const auto& b = j["box"];
      e.detection = Detection{{b.at(0).get<double>(), b.at(1).get<double>(),
                               b.at(2).get<double>(), b.at(3).get<double>()},
                              j.value("confidence", 0.0)};
    }
    e.reference_reset = j.value("reference_reset", false);
    e.note = j.value("note", "");
    e.error = j.value("error", "");
  } catch (const ordered_json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad event log line: ") + ex.what());
  }
  return e;
}

std::vector<EngineEvent> read_event_log(std::istream& in) {
  std::vector<EngineEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    events.push_back(EngineEvent::from_json_line(line));
  }
  return events;
}

}  // namespace popsweeper
