// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string_view>

#include "popsweeper/frame.hpp"
#include "popsweeper/inference_backend.hpp"
#include "popsweeper/tensor.hpp"

namespace popsweeper {

// ImageNet-style input normalization, stretch-resized (no letterbox).
struct PreprocessSpec {
  int target_width = kClassifierInputSize;
  int target_height = kClassifierInputSize;
  std::array<double, 3> channel_means{0.485, 0.456, 0.406};
  std::array<double, 3> channel_stds{0.229, 0.224, 0.225};
};

// 3 x H x W tensor of ((pixel / 255) - mean) / std per channel.
Tensor preprocess_classify(const Frame& frame, const PreprocessSpec& spec = {});

enum class ClassifierStage { kPrimary, kSecondary };

struct ClassifierScore {
  double probability = 0.0;
  ClassifierStage stage = ClassifierStage::kPrimary;
};

enum class PopupLabel { kAppContent, kPopup };

// How the secondary stage's opinion is fused with the primary's.
enum class FusionPolicy {
  kConjunctive,      // pop-up only when both stages agree
  kPrimaryDominant,  // secondary recorded but never overrides the primary
};

std::string_view to_string(PopupLabel label);
std::string_view to_string(FusionPolicy policy);
std::optional<FusionPolicy> parse_fusion_policy(std::string_view name);

struct Verdict {
  PopupLabel label = PopupLabel::kAppContent;
  ClassifierScore primary_score;
  // Absent iff the primary stage short-circuited the cascade.
  std::optional<ClassifierScore> secondary_score;
  FusionPolicy policy = FusionPolicy::kConjunctive;
};

struct ClassifierConfig {
  double primary_threshold = 0.5;
  double secondary_threshold = 0.5;
  FusionPolicy policy = FusionPolicy::kConjunctive;
  PreprocessSpec preprocess;

  void validate() const;
};

// Pure decision rule over already-computed scores. Exposed separately so the
// decision table can be checked without backends.
PopupLabel fuse(double primary, std::optional<double> secondary,
                const ClassifierConfig& config);

// Two-stage cascade. The secondary backend is only invoked on frames the
// primary flags. Backend errors surface as BackendFailure naming the stage.
Verdict classify(const Frame& frame, const InferenceBackend& primary,
                 const InferenceBackend& secondary,
                 const ClassifierConfig& config = {});

inline Verdict classify(const Frame& frame, const InferenceBackend& primary,
                        const InferenceBackend& secondary, double threshold,
                        FusionPolicy policy) {
  ClassifierConfig config;
  config.primary_threshold = threshold;
  config.secondary_threshold = threshold;
  config.policy = policy;
  return classify(frame, primary, secondary, config);
}

}  // namespace popsweeper
