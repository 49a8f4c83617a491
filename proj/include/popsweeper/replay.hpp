// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "popsweeper/engine.hpp"
#include "popsweeper/evaluation.hpp"

namespace popsweeper {

struct ReplayResult {
  std::string session_id;
  std::vector<EngineEvent> events;
  std::size_t frames = 0;
  std::size_t dismissals = 0;
  std::optional<EvaluationReport> report;

  // JSON lines, one per considered frame, newline-terminated.
  std::string event_log() const;
};

// Feeds a replay directory through the engine in manifest order. With an
// annotation the session is named after its app id and a report is produced.
ReplayResult replay_command(const Engine& engine, const std::filesystem::path& frames_dir,
                            const std::optional<RecordingAnnotation>& annotation = std::nullopt);

}  // namespace popsweeper
