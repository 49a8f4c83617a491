// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/inference_backend.hpp"

#include <cmath>

#include "popsweeper/error.hpp"

namespace popsweeper {

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::kScriptedOracle ? "scripted-oracle" : "portable-model";
}

std::string_view to_string(BackendTask task) {
  return task == BackendTask::kBinaryClassify ? "binary-classify" : "detect";
}

double InferenceBackend::infer_classify(const InferenceInput& input) const {
  if (task() != BackendTask::kBinaryClassify) {
    throw Error(ErrorCode::kBackendFailure, "backend is not a classifier");
  }
  invocations_.fetch_add(1, std::memory_order_relaxed);
  double p = 0.0;
  try {
    p = do_classify(input);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendFailure) throw;
    throw Error(ErrorCode::kBackendFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendFailure, e.what());
  }
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw Error(ErrorCode::kBackendFailure,
                "classifier output " + std::to_string(p) + " outside [0, 1]");
  }
  return p;
}

std::vector<Detection> InferenceBackend::infer_detect(const InferenceInput& input) const {
  if (task() != BackendTask::kDetect) {
    throw Error(ErrorCode::kBackendFailure, "backend is not a detector");
  }
  invocations_.fetch_add(1, std::memory_order_relaxed);
  std::vector<Detection> detections;
  try {
    detections = do_detect(input);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendFailure) throw;
    throw Error(ErrorCode::kBackendFailure, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendFailure, e.what());
  }
  for (const auto& d : detections) {
    if (!std::isfinite(d.confidence) || d.confidence < 0.0 || d.confidence > 1.0) {
      throw Error(ErrorCode::kBackendFailure, "detection confidence outside [0, 1]");
    }
  }
  return detections;
}

double InferenceBackend::do_classify(const InferenceInput&) const {
  throw Error(ErrorCode::kBackendFailure, "classification not supported");
}

std::vector<Detection> InferenceBackend::do_detect(const InferenceInput&) const {
  throw Error(ErrorCode::kBackendFailure, "detection not supported");
}

}  // namespace popsweeper
