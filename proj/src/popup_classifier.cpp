// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/popup_classifier.hpp"

#include <array>
#include <cstdint>

#include "popsweeper/error.hpp"
#include "popsweeper/image_ops.hpp"

namespace popsweeper {

std::string_view to_string(PopupLabel label) {
  return label == PopupLabel::kPopup ? "popup" : "app_content";
}

std::string_view to_string(FusionPolicy policy) {
  return policy == FusionPolicy::kConjunctive ? "conjunctive" : "primary-dominant";
}

std::optional<FusionPolicy> parse_fusion_policy(std::string_view name) {
  if (name == "conjunctive") return FusionPolicy::kConjunctive;
  if (name == "primary-dominant") return FusionPolicy::kPrimaryDominant;
  return std::nullopt;
}

Tensor preprocess_classify(const Frame& frame, const PreprocessSpec& spec) {
  for (double s : spec.channel_stds) {
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "std must be positive");
  }
  if (frame.pixel_count() == 0) throw Error(ErrorCode::kEmptyFrame, "empty frame");

  const int w = spec.target_width;
  const int h = spec.target_height;
  const PixelBuffer resized = resize_bilinear(frame, w, h);
  Tensor tensor({3, h, w});
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (int c = 0; c < 3; ++c) {
    // One lookup per byte value instead of a multiply-add per pixel.
    std::array<float, 256> lut{};
    for (int v = 0; v < 256; ++v) {
      lut[static_cast<std::size_t>(v)] = static_cast<float>(
          (v / 255.0 - spec.channel_means[c]) / spec.channel_stds[c]);
    }
    float* dst = tensor.data.data() + c * plane;
    const std::uint8_t* src = resized.rgb.data() + c;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = lut[src[i * 3]];
  }
  return tensor;
}

void ClassifierConfig::validate() const {
  for (double t : {primary_threshold, secondary_threshold}) {
    if (!(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "classifier threshold must lie in (0, 1)");
    }
  }
}

PopupLabel fuse(double primary, std::optional<double> secondary,
                const ClassifierConfig& config) {
  if (primary < config.primary_threshold) return PopupLabel::kAppContent;
  if (config.policy == FusionPolicy::kPrimaryDominant) return PopupLabel::kPopup;
  return secondary && *secondary >= config.secondary_threshold
             ? PopupLabel::kPopup
             : PopupLabel::kAppContent;
}

namespace {

double run_stage(const InferenceBackend& backend, const InferenceInput& input,
                 const char* stage) {
  try {
    return backend.infer_classify(input);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBackendFailure, std::string(stage) + " stage: " + e.what());
  }
}

}  // namespace

Verdict classify(const Frame& frame, const InferenceBackend& primary,
                 const InferenceBackend& secondary, const ClassifierConfig& config) {
  config.validate();
  const Tensor tensor = preprocess_classify(frame, config.preprocess);
  const InferenceInput input{frame, tensor};

  Verdict verdict;
  verdict.policy = config.policy;
  verdict.primary_score = {run_stage(primary, input, "primary"), ClassifierStage::kPrimary};
  if (verdict.primary_score.probability < config.primary_threshold) {
    verdict.label = PopupLabel::kAppContent;
    return verdict;
  }
  verdict.secondary_score = ClassifierScore{run_stage(secondary, input, "secondary"),
                                            ClassifierStage::kSecondary};
  verdict.label = fuse(verdict.primary_score.probability,
                       verdict.secondary_score->probability, config);
  return verdict;
}

}  // namespace popsweeper
