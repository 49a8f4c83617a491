// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>

namespace popsweeper {

// Axis-aligned box in continuous pixel coordinates, (x1, y1) top-left.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept {
    return std::max(0.0, width()) * std::max(0.0, height());
  }
  bool valid() const noexcept { return x1 < x2 && y1 < y2; }
  bool contains(double x, double y) const noexcept {
    return x >= x1 && x <= x2 && y >= y1 && y <= y2;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  BoundingBox box;
  double confidence = 0.0;
};

struct ClickTarget {
  double x = 0.0;
  double y = 0.0;
};

inline ClickTarget box_center(const BoundingBox& box) {
  return {(box.x1 + box.x2) / 2.0, (box.y1 + box.y2) / 2.0};
}

}  // namespace popsweeper
