// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/image_ops.hpp"

#include <opencv2/imgproc.hpp>

#include "popsweeper/error.hpp"

namespace popsweeper {

PixelBuffer resize_bilinear(const Frame& frame, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be positive");
  }
  PixelBuffer out{out_width, out_height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(out_width) * out_height * 3)};
  // OpenCV only reads from src.
  const cv::Mat src(frame.height(), frame.width(), CV_8UC3,
                    const_cast<std::uint8_t*>(frame.pixels().data()));
  cv::Mat dst(out_height, out_width, CV_8UC3, out.rgb.data());
  if (out_width == frame.width() && out_height == frame.height()) {
    src.copyTo(dst);
  } else {
    cv::resize(src, dst, dst.size(), 0.0, 0.0, cv::INTER_LINEAR);
  }
  return out;
}

}  // namespace popsweeper
