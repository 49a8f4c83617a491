// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/wire_protocol.hpp"

#include <algorithm>
#include <json.hpp>

namespace popsweeper {

using nlohmann::json;
using nlohmann::ordered_json;

std::array<std::uint8_t, 4> encode_length(std::uint32_t length) {
  return {static_cast<std::uint8_t>(length >> 24), static_cast<std::uint8_t>(length >> 16),
          static_cast<std::uint8_t>(length >> 8), static_cast<std::uint8_t>(length)};
}

std::uint32_t decode_length(std::span<const std::uint8_t, 4> prefix) {
  return (std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
         (std::uint32_t{prefix[2]} << 8) | std::uint32_t{prefix[3]};
}

std::string header_to_json(const RequestHeader& header) {
  ordered_json j;
  j["session"] = header.session;
  j["frame_id"] = header.frame_id;
  j["timestamp_ms"] = header.timestamp_ms;
  j["width"] = header.width;
  j["height"] = header.height;
  j["encoding"] = to_string(header.encoding);
  return j.dump();
}

RequestHeader parse_request_header(std::string_view json_text) {
  RequestHeader h;
  try {
    const json j = json::parse(json_text);
    h.session = j.at("session").get<std::string>();
    h.frame_id = j.at("frame_id").get<std::int64_t>();
    h.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    const auto encoding = j.at("encoding").get<std::string>();
    const auto parsed = parse_image_encoding(encoding);
    if (!parsed) throw Error(ErrorCode::kProtocolError, "unknown encoding '" + encoding + "'");
    h.encoding = *parsed;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("malformed header: ") + e.what());
  }
  if (h.session.empty()) throw Error(ErrorCode::kProtocolError, "empty session id");
  if (h.width < 1 || h.height < 1) {
    throw Error(ErrorCode::kProtocolError, "width and height must be positive");
  }
  return h;
}

std::vector<std::uint8_t> make_request_payload(const RequestHeader& header,
                                               std::span<const std::uint8_t> image) {
  const std::string text = header_to_json(header);
  std::vector<std::uint8_t> payload;
  payload.reserve(text.size() + 1 + image.size());
  payload.insert(payload.end(), text.begin(), text.end());
  payload.push_back('\n');
  payload.insert(payload.end(), image.begin(), image.end());
  return payload;
}

ParsedRequest split_request_payload(std::span<const std::uint8_t> payload) {
  const auto newline = std::find(payload.begin(), payload.end(), std::uint8_t{'\n'});
  if (newline == payload.end()) {
    throw Error(ErrorCode::kProtocolError, "header is not newline-terminated");
  }
  const auto header_len = static_cast<std::size_t>(newline - payload.begin());
  const std::string_view text(reinterpret_cast<const char*>(payload.data()), header_len);
  return {parse_request_header(text), payload.subspan(header_len + 1)};
}

Frame decode_request(const ParsedRequest& request) {
  const auto& h = request.header;
  PixelBuffer image = decode_image(request.image, h.encoding, ImageSize{h.width, h.height});
  if (image.width != h.width || image.height != h.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "header declares " + std::to_string(h.width) + "x" + std::to_string(h.height) +
                    ", image is " + std::to_string(image.width) + "x" +
                    std::to_string(image.height));
  }
  return Frame(h.session, h.frame_id, h.timestamp_ms, std::move(image));
}

std::string error_response_json(ErrorCode code, std::string_view message) {
  ordered_json j;
  j["action"] = "continue";
  j["error"] = {{"code", to_string(code)}, {"message", message}};
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace popsweeper
