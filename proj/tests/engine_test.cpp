// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <json.hpp>
#include <sstream>

#include "popsweeper/engine.hpp"
#include "popsweeper/error.hpp"
#include "support/synthetic.hpp"

namespace popsweeper {
namespace {

using testing::make_frame;

struct Rig {
  std::shared_ptr<OracleScript> script = std::make_shared<OracleScript>();
  EngineConfig config;

  Engine engine() const {
    return Engine(config,
                  {make_oracle_backend(script, OracleField::kPrimary, BackendTask::kBinaryClassify),
                   make_oracle_backend(script, OracleField::kSecondary, BackendTask::kBinaryClassify),
                   make_oracle_backend(script, OracleField::kDetections, BackendTask::kDetect)});
  }
};

constexpr int kW = 90;
constexpr int kH = 160;

OracleEntry popup_entry(const testing::PopupScene& scene) {
  // Same size frame as model space is not assumed: map through the letterbox.
  const auto t = letterbox_transform(kW, kH);
  return {0.95, 0.9, {{t.map(scene.close_button), 0.9}}};
}

TEST(Engine, StaticScreenForwardsOnlyTheFirstFrame) {
  Rig rig;
  rig.script->defaults.primary = 0.1;
  const Engine engine = rig.engine();
  SessionContext session("static");
  const auto screen = testing::app_screen(kW, kH, 1);
  const auto ts = testing::stream_timestamps(10'000, 60);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto r = engine.handle_frame(session, make_frame(screen, static_cast<std::int64_t>(i), ts[i]));
    EXPECT_EQ(r.action, EngineAction::kContinue);
  }
  EXPECT_EQ(session.frames_handled(), 600u);
  const auto& events = session.events();
  ASSERT_EQ(events.size(), 100u);
  // 60 fps frames land on 100 ms ticks every sixth frame.
  for (std::size_t k = 0; k < events.size(); ++k) {
    SCOPED_TRACE(k);
    EXPECT_EQ(events[k].frame_id, static_cast<std::int64_t>(6 * k));
    EXPECT_EQ(events[k].timestamp_ms, static_cast<std::int64_t>(100 * k));
    EXPECT_EQ(events[k].forwarded, k == 0);
    EXPECT_EQ(events[k].verdict.has_value(), k == 0);
    EXPECT_EQ(events[k].similarity.has_value(), k != 0);
    if (k != 0) {
      EXPECT_NEAR(*events[k].similarity, 1.0, 1e-12);
    }
  }
  EXPECT_EQ(events[0].verdict->label, PopupLabel::kAppContent);
}

TEST(Engine, PopupIsDismissedAtButtonCenter) {
  Rig rig;
  const auto screen = testing::app_screen(kW, kH, 0);
  const auto scene = testing::popup_over(screen, 0);
  const Frame frame = make_frame(scene.image, 0, 0);
  rig.script->by_hash[content_sha256(frame)] = popup_entry(scene);
  const Engine engine = rig.engine();
  SessionContext session("s");
  const auto r = engine.handle_frame(session, frame);
  ASSERT_EQ(r.action, EngineAction::kDismissPopup);
  const ClickTarget want = box_center(scene.close_button);
  EXPECT_NEAR(r.click->x, want.x, 1e-9);
  EXPECT_NEAR(r.click->y, want.y, 1e-9);
  EXPECT_EQ(r.detection->confidence, 0.9);
  ASSERT_EQ(session.events().size(), 1u);
  EXPECT_TRUE(session.events()[0].reference_reset);
  EXPECT_EQ(session.events()[0].action, EngineAction::kDismissPopup);

  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["action"], "click");
  EXPECT_EQ(j["box"].size(), 4u);
  EXPECT_EQ(j["confidence"], 0.9);
  EXPECT_TRUE(j["latency_ms"].contains("detect_ms"));
}

TEST(Engine, PopupWithoutButtonIsLoggedUnresolved) {
  Rig rig;
  rig.script->defaults = {0.95, 0.9, {}};
  const Engine engine = rig.engine();
  SessionContext session("s");
  const auto r = engine.handle_frame(session, make_frame(testing::app_screen(kW, kH, 2)));
  EXPECT_EQ(r.action, EngineAction::kContinue);
  ASSERT_EQ(session.events().size(), 1u);
  EXPECT_EQ(session.events()[0].note, "unresolved_popup");
  EXPECT_EQ(session.events()[0].verdict->label, PopupLabel::kPopup);
  EXPECT_EQ(nlohmann::json::parse(r.to_json())["action"], "continue");
}

TEST(Engine, DismissalResetsReferenceForNextFrame) {
  Rig rig;
  const auto scene = testing::popup_over(testing::app_screen(kW, kH, 0), 1);
  rig.script->defaults = popup_entry(scene);
  const Engine engine = rig.engine();
  SessionContext session("s");
  // The pop-up survives the first click (harness lag); it must be re-examined.
  for (int i = 0; i < 3; ++i) {
    const auto r = engine.handle_frame(session, make_frame(scene.image, i, i * 100));
    EXPECT_EQ(r.action, EngineAction::kDismissPopup) << i;
  }
  for (const auto& e : session.events()) {
    EXPECT_TRUE(e.forwarded);
    EXPECT_FALSE(e.similarity.has_value());
  }
}

TEST(Engine, DismissAttemptLimit) {
  Rig rig;
  rig.config.max_dismiss_attempts = 2;
  const auto scene = testing::popup_over(testing::app_screen(kW, kH, 0), 2);
  rig.script->defaults = popup_entry(scene);
  const Engine engine = rig.engine();
  SessionContext session("s");
  std::vector<EngineAction> actions;
  for (int i = 0; i < 4; ++i) {
    actions.push_back(engine.handle_frame(session, make_frame(scene.image, i, i * 100)).action);
  }
  EXPECT_EQ(actions, (std::vector<EngineAction>{EngineAction::kDismissPopup, EngineAction::kDismissPopup,
                                                EngineAction::kContinue, EngineAction::kContinue}));
  EXPECT_EQ(session.events()[2].note, "dismiss_limit");
}

class FailingClassifier final : public InferenceBackend {
 public:
  BackendKind kind() const noexcept override { return BackendKind::kPortableModel; }
  BackendTask task() const noexcept override { return BackendTask::kBinaryClassify; }

 protected:
  double do_classify(const InferenceInput&) const override { throw std::runtime_error("device lost"); }
};

TEST(Engine, BackendFailureDegradesToContinue) {
  auto script = std::make_shared<OracleScript>();
  script->defaults = {0.95, 0.9, {{{0, 0, 640, 640}, 0.9}}};
  const Engine engine(EngineConfig{},
                      {std::make_shared<FailingClassifier>(),
                       make_oracle_backend(script, OracleField::kSecondary, BackendTask::kBinaryClassify),
                       make_oracle_backend(script, OracleField::kDetections, BackendTask::kDetect)});
  SessionContext session("s");
  const auto a = engine.handle_frame(session, make_frame(testing::app_screen(kW, kH, 0), 0, 0));
  EXPECT_EQ(a.action, EngineAction::kContinue);
  EXPECT_NE(a.error.find("device lost"), std::string::npos);
  const auto b = engine.handle_frame(session, make_frame(testing::app_screen(kW, kH, 5), 1, 100));
  EXPECT_EQ(b.action, EngineAction::kContinue);
  ASSERT_EQ(session.events().size(), 2u);
  EXPECT_EQ(session.events()[0].note, "backend_failure");
  EXPECT_FALSE(session.events()[0].error.empty());
  EXPECT_TRUE(nlohmann::json::parse(a.to_json()).contains("error"));
}

TEST(Engine, OutOfOrderFramesRejected) {
  Rig rig;
  const Engine engine = rig.engine();
  SessionContext session("s");
  const auto img = testing::app_screen(kW, kH, 0);
  engine.handle_frame(session, make_frame(img, 5, 500));
  auto code = [&](std::int64_t id, std::int64_t t) {
    try {
      engine.handle_frame(session, make_frame(img, id, t));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code(5, 600), ErrorCode::kOutOfOrderFrame);
  EXPECT_EQ(code(4, 600), ErrorCode::kOutOfOrderFrame);
  EXPECT_EQ(code(6, 400), ErrorCode::kOutOfOrderFrame);
  EXPECT_NO_THROW(engine.handle_frame(session, make_frame(img, 6, 500)));
}

TEST(Engine, RejectsMisconfiguredBackends) {
  auto script = std::make_shared<OracleScript>();
  const auto cls = make_oracle_backend(script, OracleField::kPrimary, BackendTask::kBinaryClassify);
  const auto det = make_oracle_backend(script, OracleField::kDetections, BackendTask::kDetect);
  EXPECT_THROW(Engine(EngineConfig{}, {cls, cls, cls}), Error);
  EXPECT_THROW(Engine(EngineConfig{}, {cls, nullptr, det}), Error);
  EngineConfig bad;
  bad.max_dismiss_attempts = -1;
  EXPECT_THROW(Engine(bad, {cls, cls, det}), Error);
}

TEST(Engine, LatencyBreakdownAccountsForHandlingTime) {
  Rig rig;
  const auto screen = testing::app_screen(1080, 1920, 3);
  const auto scene = testing::popup_over(screen, 0);
  const auto t = letterbox_transform(1080, 1920);
  rig.script->by_hash[content_sha256(std::span<const std::uint8_t>(scene.image.rgb))] =
      {0.95, 0.9, {{t.map(scene.close_button), 0.9}}};
  const Engine engine = rig.engine();
  SessionContext session("s");
  for (int i = 0; i < 24; ++i) {
    const auto& img = (i / 6) % 2 == 0 ? screen : scene.image;
    const Frame frame = make_frame(img, i, i * 50);
    const auto start = std::chrono::steady_clock::now();
    const auto r = engine.handle_frame(session, frame);
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (double v : {r.latency.sample_ms, r.latency.classify_ms, r.latency.detect_ms, r.latency.inference_ms}) {
      EXPECT_GE(v, 0.0);
    }
    EXPECT_LE(r.latency.total_ms(), wall);
    // Cadence-gated frames take well under a microsecond; allow a small
    // absolute slack there.
    EXPECT_NEAR(r.latency.total_ms(), wall, std::max(0.1 * wall, 0.01)) << "frame " << i;
  }
}

TEST(SessionRegistryTest, SinksAreCreatedPerSession) {
  std::map<std::string, std::vector<std::int64_t>> seen;
  SessionRegistry registry([&](const std::string& id) {
    return EventSink([&seen, id](const EngineEvent& e) { seen[id].push_back(e.frame_id); });
  });
  Rig rig;
  const Engine engine = rig.engine();
  const auto img = testing::app_screen(kW, kH, 0);
  for (int i = 0; i < 3; ++i) {
    for (const char* id : {"a", "b"}) {
      auto s = registry.get_or_create(id);
      std::lock_guard lock(s->mutex);
      engine.handle_frame(s->context, make_frame(img, i, i * 100, id));
    }
  }
  EXPECT_EQ(registry.size(), 2u);
  EXPECT_EQ(seen["a"], (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(seen["b"], (std::vector<std::int64_t>{0, 1, 2}));
  EXPECT_EQ(registry.get_or_create("a"), registry.get_or_create("a"));
}

TEST(EventLog, JsonLineRoundTrip) {
  EngineEvent e;
  e.session = "s";
  e.frame_id = 12;
  e.timestamp_ms = 1200;
  e.forwarded = true;
  e.similarity = 0.25;
  Verdict v;
  v.label = PopupLabel::kPopup;
  v.primary_score = {0.95, ClassifierStage::kPrimary};
  v.secondary_score = ClassifierScore{0.9, ClassifierStage::kSecondary};
  e.verdict = v;
  e.action = EngineAction::kDismissPopup;
  e.click = ClickTarget{15, 25};
  e.detection = Detection{{10, 20, 20, 30}, 0.875};
  e.reference_reset = true;
  const std::string line = e.to_json_line();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const EngineEvent back = EngineEvent::from_json_line(line);
  EXPECT_EQ(back.to_json_line(), line);
  EXPECT_EQ(back.detection->box, e.detection->box);
  EXPECT_EQ(back.verdict->secondary_score->probability, 0.9);

  std::istringstream in(line + "\n\n" + EngineEvent{}.to_json_line() + "\n");
  EXPECT_EQ(read_event_log(in).size(), 2u);
}

}  // namespace
}  // namespace popsweeper
