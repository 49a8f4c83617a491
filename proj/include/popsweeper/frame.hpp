// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace popsweeper {

enum class ImageEncoding { kPng, kJpeg, kRawRgb8 };

std::string_view to_string(ImageEncoding encoding);
// Accepts "png", "jpeg"/"jpg" and "raw_rgb8" (case-sensitive, as on the wire).
std::optional<ImageEncoding> parse_image_encoding(std::string_view name);

// Decoded RGB8 image, row-major, 3 bytes per pixel.
struct PixelBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Decodes PNG/JPEG to RGB8 (alpha dropped, grayscale expanded). RAW_RGB8
// needs the dimensions out-of-band and is copied verbatim.
PixelBuffer decode_image(std::span<const std::uint8_t> bytes,
                         ImageEncoding encoding,
                         std::optional<ImageSize> raw_size = std::nullopt);

// PNG/JPEG (quality 95) or a verbatim RAW_RGB8 copy.
std::vector<std::uint8_t> encode_image(const PixelBuffer& image,
                                       ImageEncoding encoding);

// An immutable timestamped RGB8 screenshot. Copies share the pixel buffer.
class Frame {
 public:
  Frame(std::string session_id, std::int64_t frame_id,
        std::int64_t timestamp_ms, int width, int height,
        std::vector<std::uint8_t> pixels);
  Frame(std::string session_id, std::int64_t frame_id,
        std::int64_t timestamp_ms, PixelBuffer image);

  const std::string& session_id() const noexcept { return session_id_; }
  std::int64_t frame_id() const noexcept { return frame_id_; }
  std::int64_t timestamp_ms() const noexcept { return timestamp_ms_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::span<const std::uint8_t> pixels() const noexcept { return *pixels_; }

  std::uint8_t at(int x, int y, int channel) const noexcept {
    return (*pixels_)[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }

  // Same pixels, new identity; used when replays are re-sessioned.
  Frame with_identity(std::string session_id, std::int64_t frame_id,
                      std::int64_t timestamp_ms) const;

 private:
  std::string session_id_;
  std::int64_t frame_id_;
  std::int64_t timestamp_ms_;
  int width_;
  int height_;
  std::shared_ptr<const std::vector<std::uint8_t>> pixels_;
};

// Lowercase hex SHA-256 of the RGB8 pixel buffer.
std::string content_sha256(std::span<const std::uint8_t> pixels);
inline std::string content_sha256(const Frame& frame) {
  return content_sha256(frame.pixels());
}

}  // namespace popsweeper
