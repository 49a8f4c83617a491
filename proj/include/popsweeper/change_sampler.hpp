// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "popsweeper/frame.hpp"

namespace popsweeper {

// Per-channel normalized colour distribution of a frame. Channel c occupies
// values()[c * bins .. (c + 1) * bins).
class RgbHistogram {
 public:
  RgbHistogram(int bins_per_channel, std::vector<double> values);

  int bins_per_channel() const noexcept { return bins_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> channel(int c) const noexcept {
    return std::span<const double>(values_).subspan(
        static_cast<std::size_t>(c) * bins_, static_cast<std::size_t>(bins_));
  }

 private:
  int bins_;
  std::vector<double> values_;
};

enum class SimilarityMetric {
  kIntersection,  // (1/3) sum_c sum_k min(a, b)
  kCorrelation,   // Pearson correlation per channel, averaged, clamped to [0, 1]
};

// Which histogram becomes the comparison reference after a considered frame.
enum class ReferenceMode {
  kLastForwarded,
  kLastConsidered,
};

struct SamplerConfig {
  int interval_ms = 100;
  double similarity_threshold = 0.8;
  int bins_per_channel = 64;
  SimilarityMetric metric = SimilarityMetric::kIntersection;
  ReferenceMode reference_mode = ReferenceMode::kLastForwarded;

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

struct SamplerState {
  std::optional<RgbHistogram> reference;
  std::int64_t next_tick_ms = 0;
  std::optional<std::int64_t> last_timestamp_ms;
};

enum class SampleAction {
  kSkipCadence,  // between ticks; no histogram computed
  kSkipSimilar,  // considered, too similar to the reference
  kForward,
};

struct SampleDecision {
  SampleAction action = SampleAction::kSkipCadence;
  // Present when the frame was compared against a reference.
  std::optional<double> similarity;

  bool considered() const noexcept { return action != SampleAction::kSkipCadence; }
  bool forwarded() const noexcept { return action == SampleAction::kForward; }
};

// bins must be a power of two in [1, 256] so that every bin covers an equal
// slice of the 0..255 range.
RgbHistogram compute_histogram(const Frame& frame, int bins = 64);

double similarity(const RgbHistogram& a, const RgbHistogram& b,
                  SimilarityMetric metric = SimilarityMetric::kIntersection);

// Cadence gate plus histogram gate. Mutates state in place.
SampleDecision step(SamplerState& state, const Frame& frame,
                    const SamplerConfig& config);

void reset_reference(SamplerState& state);

}  // namespace popsweeper
