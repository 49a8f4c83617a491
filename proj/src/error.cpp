// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/error.hpp"

namespace popsweeper {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingManifest: return "MissingManifest";
    case ErrorCode::kDecodeFailure: return "DecodeFailure";
    case ErrorCode::kNonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyFrame: return "EmptyFrame";
    case ErrorCode::kBinCountMismatch: return "BinCountMismatch";
    case ErrorCode::kOutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::kBackendFailure: return "BackendFailure";
    case ErrorCode::kModelLoadFailure: return "ModelLoadFailure";
    case ErrorCode::kTaskShapeMismatch: return "TaskShapeMismatch";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kEmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::kFrameCoverageMismatch: return "FrameCoverageMismatch";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kBindFailure: return "BindFailure";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace popsweeper
