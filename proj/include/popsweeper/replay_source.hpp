// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "popsweeper/frame.hpp"

namespace popsweeper {

enum class SourceKind { kReplayDirectory, kWireStream };

struct FrameSourceInfo {
  SourceKind kind = SourceKind::kReplayDirectory;
  double nominal_fps = 60.0;
};

// One manifest.json row. width/height are only needed for .rgb/.raw files.
struct ManifestEntry {
  std::string file;
  std::int64_t timestamp_ms = 0;
  std::optional<ImageSize> raw_size;
};

inline constexpr const char* kManifestName = "manifest.json";

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir,
                    const std::vector<ManifestEntry>& entries);

// Encoding implied by a file extension (.png, .jpg/.jpeg, .rgb/.raw).
ImageEncoding encoding_for_file(const std::filesystem::path& file);

// Lazily decodes the frames of a replay directory in manifest order.
// Frame ids are the manifest indices; the session id is the directory name
// unless one is given.
class ReplaySource {
 public:
  explicit ReplaySource(std::filesystem::path dir,
                        std::optional<std::string> session_id = std::nullopt);

  const FrameSourceInfo& info() const noexcept { return info_; }
  const std::string& session_id() const noexcept { return session_id_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::optional<Frame> next();

 private:
  std::filesystem::path dir_;
  std::string session_id_;
  FrameSourceInfo info_;
  std::vector<ManifestEntry> entries_;
  std::size_t cursor_ = 0;
};

inline ReplaySource open_replay(const std::filesystem::path& dir) {
  return ReplaySource(dir);
}

// Decodes a whole replay directory eagerly.
std::vector<Frame> load_replay(const std::filesystem::path& dir);

}  // namespace popsweeper
