// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/close_button_detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "popsweeper/error.hpp"
#include "popsweeper/image_ops.hpp"

namespace popsweeper {

BoundingBox LetterboxTransform::map(const BoundingBox& box) const {
  return {box.x1 * scale + pad_x, box.y1 * scale + pad_y,
          box.x2 * scale + pad_x, box.y2 * scale + pad_y};
}

LetterboxTransform letterbox_transform(int width, int height, int model_size) {
  if (width < 1 || height < 1) throw Error(ErrorCode::kEmptyFrame, "empty frame");
  LetterboxTransform t;
  t.model_size = model_size;
  t.scale = std::min(static_cast<double>(model_size) / width,
                     static_cast<double>(model_size) / height);
  const int scaled_w = std::clamp(static_cast<int>(std::lround(width * t.scale)), 1, model_size);
  const int scaled_h = std::clamp(static_cast<int>(std::lround(height * t.scale)), 1, model_size);
  t.pad_x = (model_size - scaled_w) / 2;
  t.pad_y = (model_size - scaled_h) / 2;
  return t;
}

LetterboxResult letterbox(const Frame& frame, int model_size) {
  LetterboxResult result{Tensor({3, model_size, model_size}),
                         letterbox_transform(frame.width(), frame.height(), model_size)};
  const auto& t = result.transform;
  const int scaled_w = std::clamp(static_cast<int>(std::lround(frame.width() * t.scale)), 1, model_size);
  const int scaled_h = std::clamp(static_cast<int>(std::lround(frame.height() * t.scale)), 1, model_size);
  const int left = static_cast<int>(t.pad_x);
  const int top = static_cast<int>(t.pad_y);

  std::fill(result.tensor.data.begin(), result.tensor.data.end(),
            kLetterboxPadValue / 255.0f);
  const PixelBuffer resized = resize_bilinear(frame, scaled_w, scaled_h);
  std::array<float, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = static_cast<float>(v / 255.0);
  for (int y = 0; y < scaled_h; ++y) {
    const std::uint8_t* src = resized.rgb.data() + static_cast<std::size_t>(y) * scaled_w * 3;
    for (int c = 0; c < 3; ++c) {
      float* dst = &result.tensor.at(c, top + y, left);
      for (int x = 0; x < scaled_w; ++x) dst[x] = lut[src[x * 3 + c]];
    }
  }
  return result;
}

BoundingBox unmap_box(const BoundingBox& model_box, const LetterboxTransform& t,
                      int frame_width, int frame_height) {
  const double w = frame_width;
  const double h = frame_height;
  BoundingBox box{std::clamp((model_box.x1 - t.pad_x) / t.scale, 0.0, w),
                  std::clamp((model_box.y1 - t.pad_y) / t.scale, 0.0, h),
                  std::clamp((model_box.x2 - t.pad_x) / t.scale, 0.0, w),
                  std::clamp((model_box.y2 - t.pad_y) / t.scale, 0.0, h)};
  if (!box.valid()) {
    throw Error(ErrorCode::kDegenerateBox, "box collapses after unmapping");
  }
  return box;
}

std::optional<CloseButton> select_close_button(std::span<const Detection> model_detections,
                                               const LetterboxTransform& t,
                                               int frame_width, int frame_height,
                                               double conf_threshold) {
  std::optional<Detection> best;
  for (const Detection& candidate : model_detections) {
    if (candidate.confidence < conf_threshold) continue;
    Detection mapped{};
    try {
      mapped = {unmap_box(candidate.box, t, frame_width, frame_height),
                candidate.confidence};
    } catch (const Error&) {
      continue;
    }
    const bool better =
        !best || mapped.confidence > best->confidence ||
        (mapped.confidence == best->confidence &&
         (mapped.box.area() > best->box.area() ||
          (mapped.box.area() == best->box.area() && mapped.box.x1 < best->box.x1)));
    if (better) best = mapped;
  }
  if (!best) return std::nullopt;
  return CloseButton{box_center(best->box), *best};
}

std::optional<CloseButton> detect_close_button(const Frame& frame,
                                               const InferenceBackend& backend,
                                               double conf_threshold) {
  if (!(conf_threshold >= 0.0 && conf_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "conf_threshold must lie in [0, 1)");
  }
  const LetterboxResult input = letterbox(frame, kDetectorInputSize);
  const std::vector<Detection> raw = backend.infer_detect({frame, input.tensor});
  return select_close_button(raw, input.transform, frame.width(), frame.height(),
                             conf_threshold);
}

}  // namespace popsweeper
