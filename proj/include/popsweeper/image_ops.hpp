// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "popsweeper/frame.hpp"

namespace popsweeper {

// Bilinear resample with pixel-center alignment (src = (dst + 0.5) * s - 0.5,
// clamped at the border), rounded to 8-bit RGB. An identity-size resize
// returns the source pixels unchanged.
PixelBuffer resize_bilinear(const Frame& frame, int out_width, int out_height);

}  // namespace popsweeper
