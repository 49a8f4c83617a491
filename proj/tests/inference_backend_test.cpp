// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "popsweeper/close_button_detector.hpp"
#include "popsweeper/error.hpp"
#include "popsweeper/inference_backend.hpp"
#include "popsweeper/popup_classifier.hpp"
#include "support/synthetic.hpp"

namespace popsweeper {
namespace {

namespace fs = std::filesystem;
using testing::make_frame;
using testing::solid_image;

const fs::path kModels = fs::path(POPSWEEPER_TEST_DATA) / "models";

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

double classify_with(const InferenceBackend& b, const Frame& f) {
  const Tensor t = preprocess_classify(f);
  return b.infer_classify({f, t});
}

std::vector<Detection> detect_with(const InferenceBackend& b, const Frame& f) {
  const auto lb = letterbox(f);
  return b.infer_detect({f, lb.tensor});
}

TEST(Oracle, AnswersScriptedFramesAndDefaultsOtherwise) {
  const Frame red = make_frame(solid_image(4, 4, {255, 0, 0}), 0);
  const Frame blue = make_frame(solid_image(4, 4, {0, 0, 255}), 1);
  const Frame green = make_frame(solid_image(4, 4, {0, 255, 0}), 2);
  const std::string text = R"({"frames": {")" + content_sha256(red) +
                           R"(": {"primary": 0.95, "secondary": 0.9, "detections": [[1, 2, 3, 4, 0.8]]}, ")" +
                           content_sha256(blue) + R"(": {"primary": 0.1}}})";
  auto script = std::make_shared<OracleScript>(OracleScript::parse(text));
  const auto primary = make_oracle_backend(script, OracleField::kPrimary, BackendTask::kBinaryClassify);
  const auto secondary = make_oracle_backend(script, OracleField::kSecondary, BackendTask::kBinaryClassify);
  const auto detector = make_oracle_backend(script, OracleField::kDetections, BackendTask::kDetect);
  EXPECT_EQ(primary->kind(), BackendKind::kScriptedOracle);

  EXPECT_EQ(classify_with(*primary, red), 0.95);
  EXPECT_EQ(classify_with(*secondary, red), 0.9);
  EXPECT_EQ(classify_with(*primary, blue), 0.1);
  EXPECT_EQ(classify_with(*primary, green), 0.0);
  EXPECT_EQ(classify_with(*secondary, green), 0.0);

  const auto dets = detect_with(*detector, red);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].box, (BoundingBox{1, 2, 3, 4}));
  EXPECT_EQ(dets[0].confidence, 0.8);
  EXPECT_TRUE(detect_with(*detector, blue).empty());
  EXPECT_TRUE(detect_with(*detector, green).empty());
  EXPECT_EQ(primary->invocation_count(), 3u);
}

TEST(Oracle, FrameIdKeysAndDefaults) {
  const auto script = std::make_shared<OracleScript>(OracleScript::parse(
      R"({"defaults": {"primary": 0.3}, "frame_ids": {"7": {"secondary": 0.6}}})"));
  const auto secondary = make_oracle_backend(script, OracleField::kSecondary, BackendTask::kBinaryClassify);
  const auto primary = make_oracle_backend(script, OracleField::kPrimary, BackendTask::kBinaryClassify);
  const Frame f7 = make_frame(solid_image(2, 2, {1, 1, 1}), 7);
  const Frame f8 = make_frame(solid_image(2, 2, {1, 1, 1}), 8);
  EXPECT_EQ(classify_with(*secondary, f7), 0.6);
  EXPECT_EQ(classify_with(*primary, f7), 0.3);  // inherited from defaults
  EXPECT_EQ(classify_with(*secondary, f8), 0.0);
}

TEST(Oracle, DumpParseRoundTrip) {
  OracleScript s;
  s.defaults.primary = 0.25;
  s.by_hash["abc"] = {0.5, 0.75, {{{1.5, 2, 3, 4}, 0.125}}};
  s.by_frame_id[3] = {1.0, 0.0, {}};
  const OracleScript back = OracleScript::parse(s.dump());
  EXPECT_EQ(back.defaults.primary, 0.25);
  ASSERT_EQ(back.by_hash.count("abc"), 1u);
  EXPECT_EQ(back.by_hash.at("abc").secondary, 0.75);
  EXPECT_EQ(back.by_hash.at("abc").detections[0].box.x1, 1.5);
  EXPECT_EQ(back.by_frame_id.at(3).primary, 1.0);
  EXPECT_EQ(back.dump(), s.dump());
}

TEST(Oracle, MalformedScripts) {
  EXPECT_EQ(code_of([] { OracleScript::parse("[1,2]"); }), ErrorCode::kModelLoadFailure);
  EXPECT_EQ(code_of([] { OracleScript::parse("{"); }), ErrorCode::kModelLoadFailure);
  EXPECT_EQ(code_of([] { OracleScript::parse(R"({"defaults": {"primary": 1.5}})"); }),
            ErrorCode::kModelLoadFailure);
  EXPECT_EQ(code_of([] { OracleScript::parse(R"({"defaults": {"detections": [[1, 2, 3]]}})"); }),
            ErrorCode::kModelLoadFailure);
  EXPECT_EQ(code_of([] { OracleScript::parse(R"({"frame_ids": {"x": {}}})"); }),
            ErrorCode::kModelLoadFailure);
  EXPECT_EQ(code_of([] { OracleScript::load("/nonexistent/oracle.json"); }),
            ErrorCode::kModelLoadFailure);
}

TEST(Oracle, FieldTaskMismatch) {
  auto script = std::make_shared<OracleScript>();
  EXPECT_EQ(code_of([&] { make_oracle_backend(script, OracleField::kDetections, BackendTask::kBinaryClassify); }),
            ErrorCode::kTaskShapeMismatch);
  EXPECT_EQ(code_of([&] { make_oracle_backend(script, OracleField::kPrimary, BackendTask::kDetect); }),
            ErrorCode::kTaskShapeMismatch);
}

TEST(Oracle, WrongTaskCallIsBackendFailure) {
  auto script = std::make_shared<OracleScript>();
  const auto detector = make_oracle_backend(script, OracleField::kDetections, BackendTask::kDetect);
  const Frame f = make_frame(solid_image(2, 2, {0, 0, 0}));
  EXPECT_EQ(code_of([&] { classify_with(*detector, f); }), ErrorCode::kBackendFailure);
}

TEST(PortableModel, ClassifierOutputIsProbability) {
  const auto backend = load_model_backend(kModels / "classifier.onnx", BackendTask::kBinaryClassify);
  EXPECT_EQ(backend->kind(), BackendKind::kPortableModel);
  EXPECT_EQ(backend->task(), BackendTask::kBinaryClassify);
  for (int variant = 0; variant < 4; ++variant) {
    const Frame f = make_frame(testing::app_screen(90, 160, variant));
    const double p = classify_with(*backend, f);
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_EQ(p, classify_with(*backend, f));
  }
}

TEST(PortableModel, DetectorOnBlankImageStaysInRange) {
  const auto backend = load_model_backend(kModels / "detector.onnx", BackendTask::kDetect);
  const auto dets = detect_with(*backend, make_frame(solid_image(1080, 1920, {0, 0, 0})));
  EXPECT_FALSE(dets.empty());
  for (const auto& d : dets) {
    EXPECT_GE(d.confidence, 0.0);
    EXPECT_LE(d.confidence, 1.0);
    for (double v : {d.box.x1, d.box.y1, d.box.x2, d.box.y2}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 640.0);
    }
  }
}

TEST(PortableModel, WrongOutputShapeIsTaskShapeMismatch) {
  EXPECT_EQ(code_of([] { load_model_backend(kModels / "detector.onnx", BackendTask::kBinaryClassify); }),
            ErrorCode::kTaskShapeMismatch);
  EXPECT_EQ(code_of([] { load_model_backend(kModels / "classifier.onnx", BackendTask::kDetect); }),
            ErrorCode::kTaskShapeMismatch);
}

TEST(PortableModel, MissingOrCorruptFile) {
  EXPECT_EQ(code_of([] { load_model_backend(kModels / "absent.onnx", BackendTask::kDetect); }),
            ErrorCode::kModelLoadFailure);
  const fs::path junk = fs::temp_directory_path() / "popsweeper-junk.onnx";
  {
    std::ofstream out(junk);
    out << "not a model";
  }
  EXPECT_EQ(code_of([&] { load_model_backend(junk, BackendTask::kDetect); }),
            ErrorCode::kModelLoadFailure);
  fs::remove(junk);
}

}  // namespace
}  // namespace popsweeper
