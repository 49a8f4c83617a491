// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "popsweeper/change_sampler.hpp"
#include "popsweeper/close_button_detector.hpp"
#include "popsweeper/event_log.hpp"
#include "popsweeper/frame.hpp"
#include "popsweeper/inference_backend.hpp"
#include "popsweeper/popup_classifier.hpp"

namespace popsweeper {

struct EngineConfig {
  SamplerConfig sampler;
  ClassifierConfig classifier;
  double detector_conf_threshold = 0.25;
  // Consecutive dismissals allowed before the engine stops clicking on a
  // pop-up that will not go away. 0 means unlimited.
  int max_dismiss_attempts = 0;

  void validate() const;
};

struct EngineBackends {
  std::shared_ptr<const InferenceBackend> primary;
  std::shared_ptr<const InferenceBackend> secondary;
  std::shared_ptr<const InferenceBackend> detector;
};

// Wall-clock milliseconds per stage. inference_ms is the part of
// classify_ms + detect_ms spent inside backends.
struct LatencyBreakdown {
  double sample_ms = 0.0;
  double classify_ms = 0.0;
  double detect_ms = 0.0;
  double inference_ms = 0.0;

  double total_ms() const noexcept { return sample_ms + classify_ms + detect_ms; }
};

struct EngineResponse {
  EngineAction action = EngineAction::kContinue;
  std::optional<ClickTarget> click;
  std::optional<Detection> detection;
  std::optional<Verdict> verdict;
  LatencyBreakdown latency;
  std::string error;  // non-empty when a failure was degraded to Continue

  // Wire representation: {"action": "continue"} or {"action": "click", ...}.
  std::string to_json() const;
};

using EventSink = std::function<void(const EngineEvent&)>;

// Per-session mutable state. Owned by exactly one caller at a time.
class SessionContext {
 public:
  // Without a sink, events are retained in memory and exposed by events().
  explicit SessionContext(std::string session_id, EventSink sink = {});

  const std::string& session_id() const noexcept { return session_id_; }
  const SamplerState& sampler_state() const noexcept { return sampler_; }
  const std::vector<EngineEvent>& events() const noexcept { return events_; }
  std::uint64_t frames_handled() const noexcept { return frames_handled_; }

 private:
  friend class Engine;

  void emit(EngineEvent event);

  std::string session_id_;
  EventSink sink_;
  std::vector<EngineEvent> events_;
  SamplerState sampler_;
  std::optional<std::int64_t> last_frame_id_;
  int consecutive_dismissals_ = 0;
  std::uint64_t frames_handled_ = 0;
};

// Sampler -> two-stage classifier -> close-button detector. Stateless apart
// from the shared backends, so one Engine serves any number of sessions.
class Engine {
 public:
  Engine(EngineConfig config, EngineBackends backends);

  const EngineConfig& config() const noexcept { return config_; }
  const EngineBackends& backends() const noexcept { return raw_backends_; }

  // Throws OutOfOrderFrame for non-increasing frame ids or decreasing
  // timestamps. Backend failures degrade to Continue with an error string.
  EngineResponse handle_frame(SessionContext& session, const Frame& frame) const;

 private:
  EngineConfig config_;
  EngineBackends raw_backends_;
  EngineBackends timed_backends_;
};

// Thread-safe session table for the stream server. Each session is guarded
// by its own mutex so frames of one session are handled strictly in order.
class SessionRegistry {
 public:
  struct Session {
    explicit Session(std::string id, EventSink sink) : context(std::move(id), std::move(sink)) {}
    std::mutex mutex;
    SessionContext context;
  };

  using SinkFactory = std::function<EventSink(const std::string& session_id)>;

  explicit SessionRegistry(SinkFactory sink_factory = {});

  std::shared_ptr<Session> get_or_create(const std::string& session_id);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  SinkFactory sink_factory_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace popsweeper
