// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popsweeper/event_log.hpp"
#include "popsweeper/geometry.hpp"
#include "popsweeper/popup_classifier.hpp"

namespace popsweeper {

// ---- classification -------------------------------------------------------

struct ClassificationCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const noexcept { return tp + fp + fn + tn; }
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic mean; 0 when precision + recall == 0.
double f1_score(double precision, double recall);

// Degenerate denominators yield 0 rather than an error.
PrecisionRecall classification_metrics(const ClassificationCounts& counts);

// ---- detection ------------------------------------------------------------

// Intersection over union of two boxes in continuous coordinates.
double iou(const BoundingBox& a, const BoundingBox& b);

struct RankedMatch {
  double confidence = 0.0;
  bool true_positive = false;
};

// Predictions of a whole corpus ranked by confidence (descending) with their
// match outcome, plus the number of ground-truth boxes.
struct DetectionMatchSet {
  std::vector<RankedMatch> ranked;
  std::int64_t ground_truth_count = 0;

  std::int64_t true_positives() const;
  std::int64_t false_positives() const;
  std::int64_t false_negatives() const { return ground_truth_count - true_positives(); }
};

// Per-frame predictions and ground truth, index-aligned.
struct DetectionCorpus {
  std::vector<std::vector<Detection>> predictions;
  std::vector<std::vector<BoundingBox>> ground_truth;
};

// Greedy one-to-one matching per frame in descending confidence order. A
// prediction claims the unmatched ground-truth box it overlaps most, provided
// IoU >= iou_threshold; otherwise it is a false positive.
DetectionMatchSet match_detections(const DetectionCorpus& corpus, double iou_threshold);

enum class ApMode {
  kRiemannSum,        // sum_i P(i) * dR(i) over the ranked list
  kMonotoneEnvelope,  // P(i) replaced by max_{j >= i} P(j) first
};

// Throws EmptyGroundTruth when the corpus has no ground-truth boxes.
double average_precision(const DetectionMatchSet& matches, ApMode mode);

// Single class, so the class mean is the class AP (monotone envelope).
double map_at(const DetectionCorpus& corpus, double iou_threshold);
// Mean of map_at over IoU 0.50, 0.55, ..., 0.95.
double map_range(const DetectionCorpus& corpus);

// The ten thresholds used by map_range, computed as (50 + 5k) / 100.
std::vector<double> coco_iou_thresholds();

// ---- annotations ----------------------------------------------------------

struct FrameAnnotation {
  std::int64_t frame_id = 0;
  PopupLabel label = PopupLabel::kAppContent;
  std::optional<BoundingBox> close_button;
  std::optional<std::string> popup_group_id;
};

struct RecordingAnnotation {
  std::string app_id;
  std::vector<FrameAnnotation> frames;

  // nullptr when the frame is not annotated.
  const FrameAnnotation* find(std::int64_t frame_id) const;
  // Throws InvalidArgument if a box or group is attached to a non-pop-up frame.
  void validate() const;
};

RecordingAnnotation parse_recording_annotation(const std::string& json_text);
// Accepts a single recording object or an array of them.
std::vector<RecordingAnnotation> load_annotations(const std::filesystem::path& path);

// ---- end to end -----------------------------------------------------------

struct EndToEndCounts {
  std::int64_t dismissals = 0;
  std::int64_t correct_dismissals = 0;
  std::int64_t popups = 0;           // pop-up episodes with a close button
  std::int64_t popups_resolved = 0;  // episodes with >= 1 correct dismissal
  bool app_has_popups = false;
  bool app_fully_resolved = false;
};

struct EndToEndMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double apps_fully_resolved_fraction = 0.0;
};

// A dismissal is correct iff its frame is an annotated pop-up and the click
// lies inside the annotated close button. Frames without a group id form
// their own episode. Throws FrameCoverageMismatch when the log names frames
// the annotation does not cover.
EndToEndCounts end_to_end_counts(std::span<const EngineEvent> log,
                                 const RecordingAnnotation& annotation);
EndToEndMetrics end_to_end_metrics(std::span<const EndToEndCounts> apps);
EndToEndMetrics end_to_end_metrics(std::span<const EngineEvent> log,
                                   const RecordingAnnotation& annotation);

// ---- report ---------------------------------------------------------------

struct AppReport {
  std::string app_id;
  EndToEndCounts counts;
  EndToEndMetrics metrics;
};

struct EvaluationReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double det_precision = 0.0;
  double det_recall = 0.0;
  double box_ap = 0.0;
  double map50 = 0.0;
  double map50_95 = 0.0;
  double e2e_precision = 0.0;
  double e2e_recall = 0.0;
  double e2e_f1 = 0.0;
  double apps_fully_resolved_fraction = 0.0;
  ClassificationCounts classification_counts;
  std::vector<AppReport> apps;

  std::string to_json() const;
};

struct RecordingLog {
  RecordingAnnotation annotation;
  std::vector<EngineEvent> events;
};

// Classification counts over forwarded frames, detection metrics over the
// close buttons of forwarded pop-up frames, end-to-end metrics per app.
EvaluationReport evaluate_recordings(std::span<const RecordingLog> recordings);

}  // namespace popsweeper
