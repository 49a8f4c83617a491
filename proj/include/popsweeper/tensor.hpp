// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace popsweeper {

// Dense float32 tensor in row-major order (NCHW for images, batch omitted).
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> dims)
      : shape(std::move(dims)), data(element_count(shape), 0.0f) {}

  static std::size_t element_count(const std::vector<std::int64_t>& dims) {
    return static_cast<std::size_t>(std::accumulate(
        dims.begin(), dims.end(), std::int64_t{1}, std::multiplies<>()));
  }

  // CHW accessor for 3-d image tensors.
  float& at(std::int64_t c, std::int64_t y, std::int64_t x) {
    return data[static_cast<std::size_t>((c * shape[1] + y) * shape[2] + x)];
  }
  float at(std::int64_t c, std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>((c * shape[1] + y) * shape[2] + x)];
  }
};

}  // namespace popsweeper
