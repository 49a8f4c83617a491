// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace popsweeper {

enum class ErrorCode {
  kInvalidArgument,
  kMissingManifest,
  kDecodeFailure,
  kNonMonotoneTimestamps,
  kDimensionMismatch,
  kEmptyFrame,
  kBinCountMismatch,
  kOutOfOrderFrame,
  kBackendFailure,
  kModelLoadFailure,
  kTaskShapeMismatch,
  kDegenerateBox,
  kEmptyGroundTruth,
  kFrameCoverageMismatch,
  kProtocolError,
  kBindFailure,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the engine carries one of the codes above so that
// the service layer can map it onto a structured error payload.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace popsweeper
