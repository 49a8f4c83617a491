// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/replay.hpp"

#include "popsweeper/replay_source.hpp"

namespace popsweeper {

std::string ReplayResult::event_log() const {
  std::string out;
  for (const auto& e : events) {
    out += e.to_json_line();
    out += '\n';
  }
  return out;
}

ReplayResult replay_command(const Engine& engine, const std::filesystem::path& frames_dir,
                            const std::optional<RecordingAnnotation>& annotation) {
  ReplaySource source(frames_dir, annotation ? std::optional(annotation->app_id)
                                             : std::nullopt);
  ReplayResult result;
  result.session_id = source.session_id();
  SessionContext session(source.session_id());
  while (auto frame = source.next()) {
    const EngineResponse response = engine.handle_frame(session, *frame);
    ++result.frames;
    if (response.action == EngineAction::kDismissPopup) ++result.dismissals;
  }
  result.events = session.events();
  if (annotation) {
    const RecordingLog recording{*annotation, result.events};
    result.report = evaluate_recordings(std::span<const RecordingLog>(&recording, 1));
  }
  return result;
}

}  // namespace popsweeper
