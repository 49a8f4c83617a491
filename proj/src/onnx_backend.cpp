// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <mutex>
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "popsweeper/error.hpp"
#include "popsweeper/inference_backend.hpp"

namespace popsweeper {

namespace {

constexpr int kDetectionRowWidth = 6;

int input_size_for(BackendTask task) {
  return task == BackendTask::kBinaryClassify ? kClassifierInputSize
                                              : kDetectorInputSize;
}

std::string shape_string(const cv::Mat& m) {
  std::string s = "[";
  for (int i = 0; i < m.dims; ++i) {
    if (i) s += ",";
    s += std::to_string(m.size[i]);
  }
  return s + "]";
}

// Classifier: exactly one value. Detector: last axis of width 6 and any
// number of rows (including zero).
bool output_matches(const cv::Mat& out, BackendTask task) {
  if (task == BackendTask::kBinaryClassify) return out.total() == 1;
  return out.dims >= 2 && out.size[out.dims - 1] == kDetectionRowWidth &&
         out.total() % kDetectionRowWidth == 0;
}

// ONNX graph executed through OpenCV's DNN module. cv::dnn::Net is not
// re-entrant, so forward passes are serialized.
class OnnxBackend final : public InferenceBackend {
 public:
  OnnxBackend(cv::dnn::Net net, BackendTask task)
      : net_(std::move(net)), task_(task) {}

  BackendKind kind() const noexcept override { return BackendKind::kPortableModel; }
  BackendTask task() const noexcept override { return task_; }

  cv::Mat forward(const Tensor& tensor) const {
    const int size = input_size_for(task_);
    const std::vector<std::int64_t> expected{3, size, size};
    if (tensor.shape != expected) {
      throw Error(ErrorCode::kBackendFailure, "unexpected input tensor shape");
    }
    const int dims[] = {1, 3, size, size};
    cv::Mat blob(4, dims, CV_32F, const_cast<float*>(tensor.data.data()));
    std::lock_guard lock(mutex_);
    try {
      net_.setInput(blob);
      return net_.forward().clone();
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::kBackendFailure, e.what());
    }
  }

 protected:
  double do_classify(const InferenceInput& input) const override {
    const cv::Mat out = forward(input.tensor);
    if (!output_matches(out, task_)) {
      throw Error(ErrorCode::kBackendFailure, "classifier output " + shape_string(out));
    }
    return static_cast<double>(out.ptr<float>()[0]);
  }

  std::vector<Detection> do_detect(const InferenceInput& input) const override {
    const cv::Mat out = forward(input.tensor);
    if (!output_matches(out, task_)) {
      throw Error(ErrorCode::kBackendFailure, "detector output " + shape_string(out));
    }
    const float* rows = out.ptr<float>();
    const std::size_t n = out.total() / kDetectionRowWidth;
    const double limit = kDetectorInputSize;
    std::vector<Detection> detections;
    detections.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float* r = rows + i * kDetectionRowWidth;
      BoundingBox box{std::clamp<double>(r[0], 0.0, limit),
                      std::clamp<double>(r[1], 0.0, limit),
                      std::clamp<double>(r[2], 0.0, limit),
                      std::clamp<double>(r[3], 0.0, limit)};
      detections.push_back({box, static_cast<double>(r[4])});
    }
    return detections;
  }

 private:
  mutable cv::dnn::Net net_;
  mutable std::mutex mutex_;
  BackendTask task_;
};

}  // namespace

std::shared_ptr<const InferenceBackend> load_model_backend(
    const std::filesystem::path& path, BackendTask task) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kModelLoadFailure, path.string() + " not found");
  }
  cv::dnn::Net net;
  try {
    net = cv::dnn::readNetFromONNX(path.string());
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kModelLoadFailure, path.string() + ": " + e.what());
  }
  if (net.empty()) {
    throw Error(ErrorCode::kModelLoadFailure, path.string() + ": empty graph");
  }
  net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
  net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);

  // Probe with a zero input of the task's geometry; a graph built for the
  // other task either rejects the input or yields the wrong output shape.
  const int size = input_size_for(task);
  const int dims[] = {1, 3, size, size};
  cv::Mat probe(4, dims, CV_32F, cv::Scalar(0));
  cv::Mat out;
  try {
    net.setInput(probe);
    out = net.forward();
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kTaskShapeMismatch,
                path.string() + " rejects a " + std::to_string(size) + "x" +
                    std::to_string(size) + " input: " + e.what());
  }
  if (!output_matches(out, task)) {
    throw Error(ErrorCode::kTaskShapeMismatch,
                path.string() + " produces " + shape_string(out) + " for task " +
                    std::string(to_string(task)));
  }
  return std::make_shared<OnnxBackend>(std::move(net), task);
}

}  // namespace popsweeper
