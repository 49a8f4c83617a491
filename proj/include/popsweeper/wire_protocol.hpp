// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0
//
// Frame-stream wire format. Every message in either direction is a 4-byte
// big-endian payload length followed by the payload.
//
//   request payload  = <single-line UTF-8 JSON header> '\n' <image bytes>
//   response payload = UTF-8 JSON
//
// Request header: {"session": "...", "frame_id": n, "timestamp_ms": t,
//                  "width": w, "height": h, "encoding": "png"|"jpeg"|"raw_rgb8"}

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "popsweeper/error.hpp"
#include "popsweeper/frame.hpp"

namespace popsweeper {

inline constexpr std::size_t kMaxMessageBytes = 64u << 20;

struct RequestHeader {
  std::string session;
  std::int64_t frame_id = 0;
  std::int64_t timestamp_ms = 0;
  int width = 0;
  int height = 0;
  ImageEncoding encoding = ImageEncoding::kPng;
};

std::array<std::uint8_t, 4> encode_length(std::uint32_t length);
std::uint32_t decode_length(std::span<const std::uint8_t, 4> prefix);

std::string header_to_json(const RequestHeader& header);
// Throws ProtocolError on malformed or incomplete headers.
RequestHeader parse_request_header(std::string_view json_text);

std::vector<std::uint8_t> make_request_payload(const RequestHeader& header,
                                               std::span<const std::uint8_t> image);

struct ParsedRequest {
  RequestHeader header;
  std::span<const std::uint8_t> image;
};

ParsedRequest split_request_payload(std::span<const std::uint8_t> payload);

// Decodes the image and checks it against the declared dimensions.
Frame decode_request(const ParsedRequest& request);

// {"action": "continue", "error": {"code": ..., "message": ...}}
std::string error_response_json(ErrorCode code, std::string_view message);

}  // namespace popsweeper
