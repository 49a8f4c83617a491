// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "popsweeper/error.hpp"
#include "popsweeper/popup_classifier.hpp"
#include "support/synthetic.hpp"

namespace popsweeper {
namespace {

using testing::make_frame;
using testing::solid_image;

struct Scripted {
  std::shared_ptr<const InferenceBackend> primary;
  std::shared_ptr<const InferenceBackend> secondary;
};

Scripted scripted(double p, double s) {
  auto script = std::make_shared<OracleScript>();
  script->defaults.primary = p;
  script->defaults.secondary = s;
  return {make_oracle_backend(script, OracleField::kPrimary, BackendTask::kBinaryClassify),
          make_oracle_backend(script, OracleField::kSecondary, BackendTask::kBinaryClassify)};
}

TEST(Preprocess, MeanCenteredGrayIsNearZero) {
  // 0.485 * 255 = 123.675
  const Tensor t = preprocess_classify(make_frame(solid_image(50, 30, {124, 116, 104})));
  ASSERT_EQ(t.shape, (std::vector<std::int64_t>{3, 224, 224}));
  for (int y = 0; y < 224; y += 17) {
    for (int x = 0; x < 224; x += 13) {
      EXPECT_NEAR(t.at(0, y, x), 0.0, 0.01);
      EXPECT_NEAR(t.at(0, y, x), (124.0 / 255.0 - 0.485) / 0.229, 1e-5);
    }
  }
}

TEST(Preprocess, NativeSizeOnlyNormalises) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> byte(0, 255);
  PixelBuffer img{224, 224, std::vector<std::uint8_t>(224 * 224 * 3)};
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(byte(rng));
  const Frame f = make_frame(img);
  const Tensor t = preprocess_classify(f);
  const double means[] = {0.485, 0.456, 0.406};
  const double stds[] = {0.229, 0.224, 0.225};
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 224; ++y) {
      for (int x = 0; x < 224; ++x) {
        const double want = (f.at(x, y, c) / 255.0 - means[c]) / stds[c];
        ASSERT_NEAR(t.at(c, y, x), want, 1e-5);
      }
    }
  }
}

TEST(Preprocess, DownscaledCheckerboardCornerAveragesBlock) {
  PixelBuffer img{448, 448, std::vector<std::uint8_t>(448 * 448 * 3)};
  for (int y = 0; y < 448; ++y) {
    for (int x = 0; x < 448; ++x) {
      const std::uint8_t v = (x + y) % 2 == 0 ? 40 : 200;
      for (int c = 0; c < 3; ++c) img.rgb[(static_cast<std::size_t>(y) * 448 + x) * 3 + c] = v;
    }
  }
  const Tensor t = preprocess_classify(make_frame(img));
  // Top-left 2x2 block: 40, 200, 200, 40 -> mean 120.
  const double block_mean = (40.0 + 200.0 + 200.0 + 40.0) / 4.0;
  EXPECT_NEAR(t.at(0, 0, 0), (block_mean / 255.0 - 0.485) / 0.229, 1e-5);
  EXPECT_NEAR(t.at(2, 223, 223), (block_mean / 255.0 - 0.406) / 0.225, 1e-5);
}

TEST(Preprocess, RejectsZeroStd) {
  PreprocessSpec spec;
  spec.channel_stds[1] = 0.0;
  EXPECT_THROW(preprocess_classify(make_frame(solid_image(2, 2, {0, 0, 0})), spec), Error);
}

struct DecisionCase {
  double primary;
  double secondary;
  FusionPolicy policy;
  PopupLabel expected;
  bool secondary_invoked;
};

TEST(Classify, DecisionTable) {
  const auto kApp = PopupLabel::kAppContent;
  const auto kPop = PopupLabel::kPopup;
  const auto kConj = FusionPolicy::kConjunctive;
  const auto kDom = FusionPolicy::kPrimaryDominant;
  const DecisionCase cases[] = {
      {0.2, 0.3, kConj, kApp, false}, {0.2, 0.9, kConj, kApp, false},
      {0.95, 0.3, kConj, kApp, true}, {0.95, 0.9, kConj, kPop, true},
      {0.2, 0.3, kDom, kApp, false},  {0.2, 0.9, kDom, kApp, false},
      {0.95, 0.3, kDom, kPop, true},  {0.95, 0.9, kDom, kPop, true},
  };
  const Frame frame = make_frame(solid_image(16, 16, {10, 20, 30}));
  for (const auto& c : cases) {
    SCOPED_TRACE(::testing::Message() << c.primary << "/" << c.secondary << " "
                                      << to_string(c.policy));
    const auto b = scripted(c.primary, c.secondary);
    const Verdict v = classify(frame, *b.primary, *b.secondary, 0.5, c.policy);
    EXPECT_EQ(v.label, c.expected);
    EXPECT_EQ(v.policy, c.policy);
    EXPECT_DOUBLE_EQ(v.primary_score.probability, c.primary);
    EXPECT_EQ(b.primary->invocation_count(), 1u);
    EXPECT_EQ(b.secondary->invocation_count(), c.secondary_invoked ? 1u : 0u);
    EXPECT_EQ(v.secondary_score.has_value(), c.secondary_invoked);
    if (v.secondary_score) {
      EXPECT_DOUBLE_EQ(v.secondary_score->probability, c.secondary);
      EXPECT_EQ(v.secondary_score->stage, ClassifierStage::kSecondary);
    }
  }
}

TEST(Classify, ThresholdIsInclusive) {
  const auto b = scripted(0.5, 0.5);
  const Frame frame = make_frame(solid_image(4, 4, {0, 0, 0}));
  EXPECT_EQ(classify(frame, *b.primary, *b.secondary).label, PopupLabel::kPopup);
}

TEST(Classify, MonotoneInPrimaryScore) {
  const Frame frame = make_frame(solid_image(4, 4, {0, 0, 0}));
  for (auto policy : {FusionPolicy::kConjunctive, FusionPolicy::kPrimaryDominant}) {
    for (double s = 0.05; s < 1.0; s += 0.1) {
      bool was_popup = false;
      for (double p = 0.0; p <= 1.0; p += 0.05) {
        const auto b = scripted(p, s);
        const bool popup = classify(frame, *b.primary, *b.secondary, 0.5, policy).label ==
                           PopupLabel::kPopup;
        EXPECT_FALSE(was_popup && !popup) << "p=" << p << " s=" << s;
        was_popup = popup;
      }
    }
  }
}

TEST(Classify, Deterministic) {
  const auto b = scripted(0.7, 0.6);
  const Frame frame = make_frame(testing::app_screen(30, 40, 2));
  const Verdict a = classify(frame, *b.primary, *b.secondary);
  const Verdict c = classify(frame, *b.primary, *b.secondary);
  EXPECT_EQ(a.label, c.label);
  EXPECT_EQ(a.primary_score.probability, c.primary_score.probability);
  EXPECT_EQ(a.secondary_score->probability, c.secondary_score->probability);
}

class ThrowingClassifier final : public InferenceBackend {
 public:
  BackendKind kind() const noexcept override { return BackendKind::kPortableModel; }
  BackendTask task() const noexcept override { return BackendTask::kBinaryClassify; }

 protected:
  double do_classify(const InferenceInput&) const override { return 1.5; }
};

TEST(Classify, OutOfRangeScoreIsBackendFailure) {
  const ThrowingClassifier bad;
  const auto b = scripted(0.9, 0.9);
  const Frame frame = make_frame(solid_image(4, 4, {0, 0, 0}));
  try {
    classify(frame, bad, *b.secondary);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendFailure);
  }
}

TEST(Classify, RejectsThresholdOutsideOpenInterval) {
  const auto b = scripted(0.9, 0.9);
  const Frame frame = make_frame(solid_image(4, 4, {0, 0, 0}));
  EXPECT_THROW(classify(frame, *b.primary, *b.secondary, 0.0, FusionPolicy::kConjunctive), Error);
  EXPECT_THROW(classify(frame, *b.primary, *b.secondary, 1.0, FusionPolicy::kConjunctive), Error);
}

TEST(FusionPolicyNames, RoundTrip) {
  for (auto p : {FusionPolicy::kConjunctive, FusionPolicy::kPrimaryDominant}) {
    EXPECT_EQ(parse_fusion_policy(to_string(p)), p);
  }
  EXPECT_FALSE(parse_fusion_policy("majority").has_value());
}

}  // namespace
}  // namespace popsweeper
