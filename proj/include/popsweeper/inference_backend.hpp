// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "popsweeper/frame.hpp"
#include "popsweeper/geometry.hpp"
#include "popsweeper/tensor.hpp"

namespace popsweeper {

enum class BackendKind { kScriptedOracle, kPortableModel };
enum class BackendTask { kBinaryClassify, kDetect };

std::string_view to_string(BackendKind kind);
std::string_view to_string(BackendTask task);

inline constexpr int kClassifierInputSize = 224;
inline constexpr int kDetectorInputSize = 640;

// The model input plus the frame it was derived from. Model backends read the
// tensor; the scripted oracle keys on the frame content.
struct InferenceInput {
  const Frame& frame;
  const Tensor& tensor;
};

// Model-invocation contract. Implementations must tolerate concurrent calls.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;

  virtual BackendKind kind() const noexcept = 0;
  virtual BackendTask task() const noexcept = 0;

  // Probability in [0, 1]. Throws BackendFailure on any failure.
  double infer_classify(const InferenceInput& input) const;
  // Boxes in model (640) space, confidences in [0, 1].
  std::vector<Detection> infer_detect(const InferenceInput& input) const;

  std::uint64_t invocation_count() const noexcept {
    return invocations_.load(std::memory_order_relaxed);
  }

 protected:
  virtual double do_classify(const InferenceInput& input) const;
  virtual std::vector<Detection> do_detect(const InferenceInput& input) const;

 private:
  mutable std::atomic<std::uint64_t> invocations_{0};
};

// Scripted outputs for one frame content hash (or frame id).
struct OracleEntry {
  double primary = 0.0;
  double secondary = 0.0;
  std::vector<Detection> detections;
};

// Annotation-driven stand-in for the neural models. Frames are matched by
// SHA-256 of their pixel buffer first, then by frame id; anything else gets
// the defaults.
struct OracleScript {
  OracleEntry defaults;
  std::map<std::string, OracleEntry> by_hash;
  std::map<std::int64_t, OracleEntry> by_frame_id;

  const OracleEntry& lookup(const Frame& frame) const;

  static OracleScript parse(const std::string& json_text);
  static OracleScript load(const std::filesystem::path& path);
  std::string dump() const;
};

// Which scripted output an oracle backend answers with.
enum class OracleField { kPrimary, kSecondary, kDetections };

std::shared_ptr<const InferenceBackend> make_oracle_backend(
    std::shared_ptr<const OracleScript> script, OracleField field,
    BackendTask task);

// Loads an ONNX graph and validates its output shape against the task by a
// probe forward pass: classifier float32[1,3,224,224] -> [1,1], detector
// float32[1,3,640,640] -> [N,6] rows (x1, y1, x2, y2, confidence, class).
std::shared_ptr<const InferenceBackend> load_model_backend(
    const std::filesystem::path& path, BackendTask task);

}  // namespace popsweeper
