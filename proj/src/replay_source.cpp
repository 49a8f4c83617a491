// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/replay_source.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "popsweeper/error.hpp"

namespace popsweeper {

namespace fs = std::filesystem;
using nlohmann::json;

ImageEncoding encoding_for_file(const fs::path& file) {
  std::string ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return ImageEncoding::kPng;
  if (ext == ".jpg" || ext == ".jpeg") return ImageEncoding::kJpeg;
  if (ext == ".rgb" || ext == ".raw") return ImageEncoding::kRawRgb8;
  throw Error(ErrorCode::kDecodeFailure,
              file.string() + ": unsupported image extension");
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kMissingManifest, path.string() + " not found");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMissingManifest,
                path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kMissingManifest,
                path.string() + " must be a JSON array");
  }

  std::vector<ManifestEntry> entries;
  entries.reserve(doc.size());
  for (const auto& row : doc) {
    try {
      ManifestEntry entry;
      entry.file = row.at("file").get<std::string>();
      entry.timestamp_ms = row.at("timestamp_ms").get<std::int64_t>();
      if (row.contains("width") || row.contains("height")) {
        entry.raw_size = ImageSize{row.at("width").get<int>(),
                                   row.at("height").get<int>()};
      }
      if (!entries.empty() && entry.timestamp_ms < entries.back().timestamp_ms) {
        throw Error(ErrorCode::kNonMonotoneTimestamps,
                    entry.file + " at " + std::to_string(entry.timestamp_ms) +
                        " ms precedes " + entries.back().file);
      }
      entries.push_back(std::move(entry));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMissingManifest,
                  path.string() + ": malformed entry: " + e.what());
    }
  }
  return entries;
}

void write_manifest(const fs::path& dir,
                    const std::vector<ManifestEntry>& entries) {
  json doc = json::array();
  for (const auto& entry : entries) {
    json row = {{"file", entry.file}, {"timestamp_ms", entry.timestamp_ms}};
    if (entry.raw_size) {
      row["width"] = entry.raw_size->width;
      row["height"] = entry.raw_size->height;
    }
    doc.push_back(std::move(row));
  }
  std::ofstream out(dir / kManifestName);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write manifest in " + dir.string());
  out << doc.dump(1) << '\n';
}

ReplaySource::ReplaySource(fs::path dir, std::optional<std::string> session_id)
    : dir_(std::move(dir)), entries_(read_manifest(dir_)) {
  session_id_ = session_id ? *session_id
                           : fs::weakly_canonical(dir_).filename().string();
}

std::optional<Frame> ReplaySource::next() {
  if (cursor_ >= entries_.size()) return std::nullopt;
  const ManifestEntry& entry = entries_[cursor_];
  const fs::path path = dir_ / entry.file;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kDecodeFailure, entry.file + ": cannot open");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  PixelBuffer image;
  try {
    image = decode_image(bytes, encoding_for_file(path), entry.raw_size);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDecodeFailure, entry.file + ": " + e.what());
  }
  const auto frame_id = static_cast<std::int64_t>(cursor_++);
  return Frame(session_id_, frame_id, entry.timestamp_ms, std::move(image));
}

std::vector<Frame> load_replay(const fs::path& dir) {
  ReplaySource source(dir);
  std::vector<Frame> frames;
  frames.reserve(source.size());
  while (auto frame = source.next()) frames.push_back(std::move(*frame));
  return frames;
}

}  // namespace popsweeper
