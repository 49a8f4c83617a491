// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/engine.hpp"

#include <chrono>
#include <json.hpp>

#include "popsweeper/error.hpp"

namespace popsweeper {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Accumulates time spent inside backend calls on the current thread.
thread_local double tls_inference_ms = 0.0;

class TimedBackend final : public InferenceBackend {
 public:
  explicit TimedBackend(std::shared_ptr<const InferenceBackend> inner)
      : inner_(std::move(inner)) {}

  BackendKind kind() const noexcept override { return inner_->kind(); }
  BackendTask task() const noexcept override { return inner_->task(); }

 protected:
  double do_classify(const InferenceInput& input) const override {
    struct Charge {
      Clock::time_point start;
      ~Charge() { tls_inference_ms += elapsed_ms(start); }
    } charge{Clock::now()};
    return inner_->infer_classify(input);
  }

  std::vector<Detection> do_detect(const InferenceInput& input) const override {
    struct Charge {
      Clock::time_point start;
      ~Charge() { tls_inference_ms += elapsed_ms(start); }
    } charge{Clock::now()};
    return inner_->infer_detect(input);
  }

 private:
  std::shared_ptr<const InferenceBackend> inner_;
};

void require_backend(const std::shared_ptr<const InferenceBackend>& backend,
                     BackendTask task, const char* name) {
  if (!backend) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " backend missing");
  if (backend->task() != task) {
    throw Error(ErrorCode::kTaskShapeMismatch,
                std::string(name) + " backend must be " + std::string(to_string(task)));
  }
}

}  // namespace

void EngineConfig::validate() const {
  sampler.validate();
  classifier.validate();
  if (!(detector_conf_threshold >= 0.0 && detector_conf_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "detector confidence threshold must lie in [0, 1)");
  }
  if (max_dismiss_attempts < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_dismiss_attempts must be >= 0");
  }
}

std::string EngineResponse::to_json() const {
  nlohmann::ordered_json j;
  j["action"] = to_string(action);
  if (action == EngineAction::kDismissPopup && click && detection) {
    j["x"] = click->x;
    j["y"] = click->y;
    const auto& b = detection->box;
    j["box"] = {b.x1, b.y1, b.x2, b.y2};
    j["confidence"] = detection->confidence;
    if (verdict) {
      j["scores"]["primary"] = verdict->primary_score.probability;
      if (verdict->secondary_score) {
        j["scores"]["secondary"] = verdict->secondary_score->probability;
      }
    }
  }
  j["latency_ms"] = {{"sample_ms", latency.sample_ms},
                     {"classify_ms", latency.classify_ms},
                     {"detect_ms", latency.detect_ms}};
  if (!error.empty()) j["error"] = error;
  return j.dump();
}

SessionContext::SessionContext(std::string session_id, EventSink sink)
    : session_id_(std::move(session_id)), sink_(std::move(sink)) {}

void SessionContext::emit(EngineEvent event) {
  if (sink_) {
    sink_(event);
  } else {
    events_.push_back(std::move(event));
  }
}

Engine::Engine(EngineConfig config, EngineBackends backends)
    : config_(std::move(config)), raw_backends_(std::move(backends)) {
  config_.validate();
  require_backend(raw_backends_.primary, BackendTask::kBinaryClassify, "primary");
  require_backend(raw_backends_.secondary, BackendTask::kBinaryClassify, "secondary");
  require_backend(raw_backends_.detector, BackendTask::kDetect, "detector");
  timed_backends_ = {std::make_shared<TimedBackend>(raw_backends_.primary),
                     std::make_shared<TimedBackend>(raw_backends_.secondary),
                     std::make_shared<TimedBackend>(raw_backends_.detector)};
}

EngineResponse Engine::handle_frame(SessionContext& session, const Frame& frame) const {
  // The sample stage runs from entry until the frame is dropped or handed to
  // the classifier, so bookkeeping is charged somewhere.
  const auto entry = Clock::now();
  if (session.last_frame_id_ && frame.frame_id() <= *session.last_frame_id_) {
    throw Error(ErrorCode::kOutOfOrderFrame,
                "frame " + std::to_string(frame.frame_id()) + " after frame " +
                    std::to_string(*session.last_frame_id_));
  }
  if (session.sampler_.last_timestamp_ms &&
      frame.timestamp_ms() < *session.sampler_.last_timestamp_ms) {
    throw Error(ErrorCode::kOutOfOrderFrame,
                "timestamp " + std::to_string(frame.timestamp_ms()) + " ms after " +
                    std::to_string(*session.sampler_.last_timestamp_ms) + " ms");
  }
  session.last_frame_id_ = frame.frame_id();
  ++session.frames_handled_;

  EngineResponse response;
  const SampleDecision decision = step(session.sampler_, frame, config_.sampler);
  if (!decision.considered()) {
    response.latency.sample_ms = elapsed_ms(entry);
    return response;
  }

  EngineEvent event;
  event.session = session.session_id_;
  event.frame_id = frame.frame_id();
  event.timestamp_ms = frame.timestamp_ms();
  event.forwarded = decision.forwarded();
  event.similarity = decision.similarity;
  if (!decision.forwarded()) {
    session.emit(std::move(event));
    response.latency.sample_ms = elapsed_ms(entry);
    return response;
  }

  tls_inference_ms = 0.0;
  auto stage_start = Clock::now();
  response.latency.sample_ms = std::chrono::duration<double, std::milli>(stage_start - entry).count();
  try {
    const Verdict verdict = classify(frame, *timed_backends_.primary,
                                     *timed_backends_.secondary, config_.classifier);
    response.latency.classify_ms = elapsed_ms(stage_start);
    response.verdict = verdict;
    event.verdict = verdict;

    if (verdict.label == PopupLabel::kAppContent) {
      session.consecutive_dismissals_ = 0;
    } else {
      stage_start = Clock::now();
      const auto button = detect_close_button(frame, *timed_backends_.detector,
                                              config_.detector_conf_threshold);
      response.latency.detect_ms = elapsed_ms(stage_start);
      if (!button) {
        event.note = "unresolved_popup";
      } else if (config_.max_dismiss_attempts > 0 &&
                 session.consecutive_dismissals_ >= config_.max_dismiss_attempts) {
        event.note = "dismiss_limit";
      } else {
        response.action = EngineAction::kDismissPopup;
        response.click = button->click;
        response.detection = button->detection;
        ++session.consecutive_dismissals_;
        reset_reference(session.sampler_);
        event.action = EngineAction::kDismissPopup;
        event.click = button->click;
        event.detection = button->detection;
        event.reference_reset = true;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBackendFailure) throw;
    const double failed_stage_ms = elapsed_ms(stage_start);
    (response.verdict ? response.latency.detect_ms : response.latency.classify_ms) =
        failed_stage_ms;
    response.action = EngineAction::kContinue;
    response.click.reset();
    response.detection.reset();
    response.error = e.what();
    event.note = "backend_failure";
    event.error = e.what();
  }
  response.latency.inference_ms = tls_inference_ms;
  session.emit(std::move(event));
  return response;
}

SessionRegistry::SessionRegistry(SinkFactory sink_factory)
    : sink_factory_(std::move(sink_factory)) {}

std::shared_ptr<SessionRegistry::Session> SessionRegistry::get_or_create(
    const std::string& session_id) {
  std::lock_guard lock(mutex_);
  auto& slot = sessions_[session_id];
  if (!slot) {
    slot = std::make_shared<Session>(session_id,
                                     sink_factory_ ? sink_factory_(session_id) : EventSink{});
  }
  return slot;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace popsweeper
