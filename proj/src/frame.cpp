// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/frame.hpp"

#include <openssl/evp.h>

#include <array>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "popsweeper/error.hpp"

namespace popsweeper {

std::string_view to_string(ImageEncoding encoding) {
  switch (encoding) {
    case ImageEncoding::kPng: return "png";
    case ImageEncoding::kJpeg: return "jpeg";
    case ImageEncoding::kRawRgb8: return "raw_rgb8";
  }
  return "unknown";
}

std::optional<ImageEncoding> parse_image_encoding(std::string_view name) {
  if (name == "png") return ImageEncoding::kPng;
  if (name == "jpeg" || name == "jpg") return ImageEncoding::kJpeg;
  if (name == "raw_rgb8") return ImageEncoding::kRawRgb8;
  return std::nullopt;
}

namespace {

std::size_t rgb_length(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
}

}  // namespace

PixelBuffer decode_image(std::span<const std::uint8_t> bytes,
                         ImageEncoding encoding,
                         std::optional<ImageSize> raw_size) {
  if (encoding == ImageEncoding::kRawRgb8) {
    if (!raw_size || raw_size->width < 1 || raw_size->height < 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "raw_rgb8 requires positive width and height");
    }
    const std::size_t expected = rgb_length(raw_size->width, raw_size->height);
    if (bytes.size() != expected) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "raw_rgb8 payload has " + std::to_string(bytes.size()) +
                      " bytes, expected " + std::to_string(expected));
    }
    return {raw_size->width, raw_size->height,
            std::vector<std::uint8_t>(bytes.begin(), bytes.end())};
  }

  if (bytes.empty()) {
    throw Error(ErrorCode::kDecodeFailure, "empty image payload");
  }
  const cv::Mat encoded(1, static_cast<int>(bytes.size()), CV_8UC1,
                        const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(encoded, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kDecodeFailure, e.what());
  }
  if (bgr.empty() || bgr.type() != CV_8UC3) {
    throw Error(ErrorCode::kDecodeFailure,
                std::string("cannot decode ") + std::string(to_string(encoding)));
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);

  PixelBuffer out{rgb.cols, rgb.rows, {}};
  out.rgb.resize(rgb_length(rgb.cols, rgb.rows));
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<std::uint8_t>(y);
    std::copy(row, row + static_cast<std::size_t>(rgb.cols) * 3,
              out.rgb.begin() + static_cast<std::ptrdiff_t>(rgb_length(rgb.cols, y)));
  }
  return out;
}

std::vector<std::uint8_t> encode_image(const PixelBuffer& image,
                                       ImageEncoding encoding) {
  if (image.rgb.size() != rgb_length(image.width, image.height) ||
      image.width < 1 || image.height < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "pixel buffer size mismatch");
  }
  if (encoding == ImageEncoding::kRawRgb8) return image.rgb;

  const cv::Mat rgb(image.height, image.width, CV_8UC3,
                    const_cast<std::uint8_t*>(image.rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> out;
  const bool ok = encoding == ImageEncoding::kPng
                      ? cv::imencode(".png", bgr, out)
                      : cv::imencode(".jpg", bgr, out,
                                     {cv::IMWRITE_JPEG_QUALITY, 95});
  if (!ok) throw Error(ErrorCode::kIoError, "image encoding failed");
  return out;
}

Frame::Frame(std::string session_id, std::int64_t frame_id,
             std::int64_t timestamp_ms, int width, int height,
             std::vector<std::uint8_t> pixels)
    : session_id_(std::move(session_id)),
      frame_id_(frame_id),
      timestamp_ms_(timestamp_ms),
      width_(width),
      height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kEmptyFrame, "frame dimensions must be positive");
  }
  if (pixels.size() != rgb_length(width, height)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pixel buffer has " + std::to_string(pixels.size()) +
                    " bytes, expected " +
                    std::to_string(rgb_length(width, height)));
  }
  pixels_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(pixels));
}

Frame::Frame(std::string session_id, std::int64_t frame_id,
             std::int64_t timestamp_ms, PixelBuffer image)
    : Frame(std::move(session_id), frame_id, timestamp_ms, image.width,
            image.height, std::move(image.rgb)) {}

Frame Frame::with_identity(std::string session_id, std::int64_t frame_id,
                           std::int64_t timestamp_ms) const {
  Frame copy = *this;
  copy.session_id_ = std::move(session_id);
  copy.frame_id_ = frame_id;
  copy.timestamp_ms_ = timestamp_ms;
  return copy;
}

std::string content_sha256(std::span<const std::uint8_t> pixels) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(pixels.data(), pixels.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

}  // namespace popsweeper
