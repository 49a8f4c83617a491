// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/change_sampler.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "popsweeper/error.hpp"

namespace popsweeper {

RgbHistogram::RgbHistogram(int bins_per_channel, std::vector<double> values)
    : bins_(bins_per_channel), values_(std::move(values)) {
  if (bins_ < 1 || values_.size() != static_cast<std::size_t>(bins_) * 3) {
    throw Error(ErrorCode::kInvalidArgument, "histogram needs 3 x bins values");
  }
}

void SamplerConfig::validate() const {
  if (interval_ms < 1) {
    throw Error(ErrorCode::kInvalidArgument, "interval_ms must be >= 1");
  }
  if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity_threshold must lie in [0, 1]");
  }
  if (bins_per_channel < 1 || bins_per_channel > 256 ||
      !std::has_single_bit(static_cast<unsigned>(bins_per_channel))) {
    throw Error(ErrorCode::kInvalidArgument,
                "bins_per_channel must be a power of two in [1, 256]");
  }
}

RgbHistogram compute_histogram(const Frame& frame, int bins) {
  if (bins < 1 || bins > 256 || !std::has_single_bit(static_cast<unsigned>(bins))) {
    throw Error(ErrorCode::kInvalidArgument,
                "bins must be a power of two in [1, 256]");
  }
  const auto pixels = frame.pixels();
  if (pixels.empty()) throw Error(ErrorCode::kEmptyFrame, "frame has no pixels");

  // Full-resolution counts first, folded into bins afterwards. Pixels are
  // taken four at a time (12 bytes, table k holds byte k) and identical
  // consecutive blocks are run-length merged; GUI screens are mostly flat.
  std::array<std::array<std::uint32_t, 256>, 12> counts{};
  const std::uint8_t* p = pixels.data();
  const std::size_t n = frame.pixel_count();
  const std::uint8_t* run_block = p;
  std::uint64_t run_lo = 0;
  std::uint32_t run_hi = 0;
  std::uint32_t run = 0;
  const auto flush = [&] {
    for (std::size_t k = 0; k < 12; ++k) counts[k][run_block[k]] += run;
  };
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4, p += 12) {
    std::uint64_t lo;
    std::uint32_t hi;
    std::memcpy(&lo, p, sizeof lo);
    std::memcpy(&hi, p + 8, sizeof hi);
    if (run != 0 && lo == run_lo && hi == run_hi) {
      ++run;
      continue;
    }
    if (run != 0) flush();
    run_block = p;
    run_lo = lo;
    run_hi = hi;
    run = 1;
  }
  if (run != 0) flush();
  for (; i < n; ++i, p += 3) {
    ++counts[0][p[0]];
    ++counts[1][p[1]];
    ++counts[2][p[2]];
  }
  // Table k holds channel k % 3.
  std::array<std::array<std::uint64_t, 256>, 3> merged{};
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t v = 0; v < 256; ++v) merged[k % 3][v] += counts[k][v];
  }

  const int shift = std::countr_zero(256u / static_cast<unsigned>(bins));
  const double total = static_cast<double>(frame.pixel_count());
  std::vector<double> values(static_cast<std::size_t>(bins) * 3, 0.0);
  for (int c = 0; c < 3; ++c) {
    std::vector<std::uint64_t> folded(static_cast<std::size_t>(bins), 0);
    for (std::size_t v = 0; v < 256; ++v) {
      folded[v >> shift] += merged[static_cast<std::size_t>(c)][v];
    }
    for (int k = 0; k < bins; ++k) {
      values[static_cast<std::size_t>(c * bins + k)] =
          static_cast<double>(folded[static_cast<std::size_t>(k)]) / total;
    }
  }
  return RgbHistogram(bins, std::move(values));
}

namespace {

double correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    mean_a += a[k];
    mean_b += b[k];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double da = a[k] - mean_a;
    const double db = b[k] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return var_a == var_b ? 1.0 : 0.0;
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

double similarity(const RgbHistogram& a, const RgbHistogram& b,
                  SimilarityMetric metric) {
  if (a.bins_per_channel() != b.bins_per_channel()) {
    throw Error(ErrorCode::kBinCountMismatch,
                std::to_string(a.bins_per_channel()) + " vs " +
                    std::to_string(b.bins_per_channel()) + " bins");
  }
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto ca = a.channel(c);
    const auto cb = b.channel(c);
    if (metric == SimilarityMetric::kIntersection) {
      for (std::size_t k = 0; k < ca.size(); ++k) sum += std::min(ca[k], cb[k]);
    } else {
      sum += correlation(ca, cb);
    }
  }
  return std::clamp(sum / 3.0, 0.0, 1.0);
}

SampleDecision step(SamplerState& state, const Frame& frame,
                    const SamplerConfig& config) {
  const std::int64_t t = frame.timestamp_ms();
  if (state.last_timestamp_ms && t < *state.last_timestamp_ms) {
    throw Error(ErrorCode::kOutOfOrderFrame,
                "timestamp " + std::to_string(t) + " ms after " +
                    std::to_string(*state.last_timestamp_ms) + " ms");
  }
  state.last_timestamp_ms = t;

  SampleDecision decision;
  if (t < state.next_tick_ms) return decision;

  // Next multiple of the interval strictly after t.
  state.next_tick_ms = (t / config.interval_ms + 1) * config.interval_ms;

  RgbHistogram histogram = compute_histogram(frame, config.bins_per_channel);
  bool forward = true;
  if (state.reference) {
    decision.similarity = similarity(*state.reference, histogram, config.metric);
    forward = *decision.similarity < config.similarity_threshold;
  }
  decision.action = forward ? SampleAction::kForward : SampleAction::kSkipSimilar;
  if (forward || config.reference_mode == ReferenceMode::kLastConsidered) {
    state.reference = std::move(histogram);
  }
  return decision;
}

void reset_reference(SamplerState& state) { state.reference.reset(); }

}  // namespace popsweeper
