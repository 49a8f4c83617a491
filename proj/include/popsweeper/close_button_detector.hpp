// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>

#include "popsweeper/frame.hpp"
#include "popsweeper/geometry.hpp"
#include "popsweeper/inference_backend.hpp"
#include "popsweeper/tensor.hpp"

namespace popsweeper {

inline constexpr float kLetterboxPadValue = 114.0f;

// Aspect-preserving fit of a width x height frame into a square canvas.
// pad_x / pad_y are whole pixels so the canvas placement is exact.
struct LetterboxTransform {
  double scale = 1.0;
  double pad_x = 0.0;
  double pad_y = 0.0;
  int model_size = kDetectorInputSize;

  // Frame pixels -> model pixels.
  BoundingBox map(const BoundingBox& box) const;
};

LetterboxTransform letterbox_transform(int width, int height,
                                       int model_size = kDetectorInputSize);

struct LetterboxResult {
  Tensor tensor;  // 3 x model_size x model_size, values in [0, 1]
  LetterboxTransform transform;
};

LetterboxResult letterbox(const Frame& frame, int model_size = kDetectorInputSize);

// Model pixels -> frame pixels, clamped to the frame. Throws DegenerateBox
// when nothing of the box survives the clamp.
BoundingBox unmap_box(const BoundingBox& model_box, const LetterboxTransform& t,
                      int frame_width, int frame_height);

struct CloseButton {
  ClickTarget click;
  Detection detection;  // box in frame pixels
};

// Drops detections under conf_threshold or degenerate after unmapping and
// picks the most confident one (ties: larger area, then smaller x1).
std::optional<CloseButton> select_close_button(std::span<const Detection> model_detections,
                                               const LetterboxTransform& t,
                                               int frame_width, int frame_height,
                                               double conf_threshold);

std::optional<CloseButton> detect_close_button(const Frame& frame,
                                               const InferenceBackend& backend,
                                               double conf_threshold = 0.25);

}  // namespace popsweeper
