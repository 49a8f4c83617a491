// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "popsweeper/geometry.hpp"
#include "popsweeper/popup_classifier.hpp"

namespace popsweeper {

enum class EngineAction { kContinue, kDismissPopup };

std::string_view to_string(EngineAction action);

// One JSON line of the engine event log, written for every frame the sampler
// considered. Carries no timing so that replays are byte-reproducible.
struct EngineEvent {
  std::string session;
  std::int64_t frame_id = 0;
  std::int64_t timestamp_ms = 0;
  bool forwarded = false;
  std::optional<double> similarity;
  std::optional<Verdict> verdict;
  EngineAction action = EngineAction::kContinue;
  std::optional<ClickTarget> click;
  std::optional<Detection> detection;
  bool reference_reset = false;
  // "unresolved_popup", "backend_failure", "dismiss_limit" or empty.
  std::string note;
  std::string error;

  std::string to_json_line() const;
  static EngineEvent from_json_line(const std::string& line);
};

std::vector<EngineEvent> read_event_log(std::istream& in);

}  // namespace popsweeper
