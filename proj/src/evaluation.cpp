// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0

#include "popsweeper/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "popsweeper/error.hpp"

namespace popsweeper {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

PrecisionRecall classification_metrics(const ClassificationCounts& counts) {
  PrecisionRecall m;
  m.precision = ratio(counts.tp, counts.tp + counts.fp);
  m.recall = ratio(counts.tp, counts.tp + counts.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni <= 0.0 ? 0.0 : std::clamp(inter / uni, 0.0, 1.0);
}

std::int64_t DetectionMatchSet::true_positives() const {
  return std::count_if(ranked.begin(), ranked.end(),
                       [](const RankedMatch& m) { return m.true_positive; });
}

std::int64_t DetectionMatchSet::false_positives() const {
  return static_cast<std::int64_t>(ranked.size()) - true_positives();
}

DetectionMatchSet match_detections(const DetectionCorpus& corpus, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "iou_threshold must lie in (0, 1)");
  }
  if (corpus.predictions.size() != corpus.ground_truth.size()) {
    throw Error(ErrorCode::kInvalidArgument, "predictions and ground truth differ in frame count");
  }
  DetectionMatchSet result;
  for (std::size_t f = 0; f < corpus.predictions.size(); ++f) {
    const auto& preds = corpus.predictions[f];
    const auto& gts = corpus.ground_truth[f];
    result.ground_truth_count += static_cast<std::int64_t>(gts.size());

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return preds[a].confidence > preds[b].confidence;
    });

    std::vector<bool> taken(gts.size(), false);
    for (std::size_t i : order) {
      double best_iou = -1.0;
      std::size_t best = gts.size();
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g]) continue;
        const double overlap = iou(preds[i].box, gts[g]);
        if (overlap > best_iou) {
          best_iou = overlap;
          best = g;
        }
      }
      const bool hit = best < gts.size() && best_iou >= iou_threshold;
      if (hit) taken[best] = true;
      result.ranked.push_back({preds[i].confidence, hit});
    }
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(),
                   [](const RankedMatch& a, const RankedMatch& b) {
                     return a.confidence > b.confidence;
                   });
  return result;
}

double average_precision(const DetectionMatchSet& matches, ApMode mode) {
  if (matches.ground_truth_count <= 0) {
    throw Error(ErrorCode::kEmptyGroundTruth, "no ground-truth boxes");
  }
  const auto n = matches.ranked.size();
  const double g = static_cast<double>(matches.ground_truth_count);

  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::int64_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (matches.ranked[i].true_positive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / g;
  }
  if (mode == ApMode::kMonotoneEnvelope) {
    for (std::size_t i = n; i-- > 1;) {
      precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
  }
  double ap = 0.0;
  double previous_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += precision[i] * (recall[i] - previous_recall);
    previous_recall = recall[i];
  }
  return ap;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> thresholds;
  for (int k = 0; k < 10; ++k) thresholds.push_back((50 + 5 * k) / 100.0);
  return thresholds;
}

double map_at(const DetectionCorpus& corpus, double iou_threshold) {
  return average_precision(match_detections(corpus, iou_threshold),
                           ApMode::kMonotoneEnvelope);
}

double map_range(const DetectionCorpus& corpus) {
  double sum = 0.0;
  for (double t : coco_iou_thresholds()) sum += map_at(corpus, t);
  return sum / 10.0;
}

// ---- annotations ----------------------------------------------------------

const FrameAnnotation* RecordingAnnotation::find(std::int64_t frame_id) const {
  // Frames are usually stored in id order; fall back to a scan otherwise.
  if (frame_id >= 0 && static_cast<std::size_t>(frame_id) < frames.size() &&
      frames[static_cast<std::size_t>(frame_id)].frame_id == frame_id) {
    return &frames[static_cast<std::size_t>(frame_id)];
  }
  for (const auto& f : frames) {
    if (f.frame_id == frame_id) return &f;
  }
  return nullptr;
}

void RecordingAnnotation::validate() const {
  std::set<std::int64_t> seen;
  for (const auto& f : frames) {
    if (!seen.insert(f.frame_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  app_id + ": frame " + std::to_string(f.frame_id) + " annotated twice");
    }
    if (f.label != PopupLabel::kPopup && (f.close_button || f.popup_group_id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  app_id + ": frame " + std::to_string(f.frame_id) +
                      " has pop-up fields but is labelled app_content");
    }
    if (f.close_button && !f.close_button->valid()) {
      throw Error(ErrorCode::kInvalidArgument,
                  app_id + ": frame " + std::to_string(f.frame_id) + " has a degenerate box");
    }
  }
}

namespace {

RecordingAnnotation recording_from_json(const json& doc) {
  RecordingAnnotation rec;
  rec.app_id = doc.at("app_id").get<std::string>();
  for (const auto& node : doc.at("frames")) {
    FrameAnnotation f;
    f.frame_id = node.at("frame_id").get<std::int64_t>();
    const auto label = node.at("label").get<std::string>();
    if (label == "popup") {
      f.label = PopupLabel::kPopup;
    } else if (label == "app_content") {
      f.label = PopupLabel::kAppContent;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown label '" + label + "'");
    }
    if (node.contains("close_button") && !node["close_button"].is_null()) {
      const auto& b = node["close_button"];
      f.close_button = BoundingBox{b.at(0).get<double>(), b.at(1).get<double>(),
                                   b.at(2).get<double>(), b.at(3).get<double>()};
    }
    if (node.contains("popup_group_id") && !node["popup_group_id"].is_null()) {
      f.popup_group_id = node["popup_group_id"].get<std::string>();
    }
    rec.frames.push_back(std::move(f));
  }
  rec.validate();
  return rec;
}

}  // namespace

RecordingAnnotation parse_recording_annotation(const std::string& json_text) {
  try {
    return recording_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad annotation: ") + e.what());
  }
}

std::vector<RecordingAnnotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path.string() + " not found");
  try {
    const json doc = json::parse(in);
    std::vector<RecordingAnnotation> out;
    if (doc.is_array()) {
      for (const auto& rec : doc) out.push_back(recording_from_json(rec));
    } else {
      out.push_back(recording_from_json(doc));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

// ---- end to end -----------------------------------------------------------

namespace {

std::string episode_key(const FrameAnnotation& f) {
  return f.popup_group_id ? "g:" + *f.popup_group_id : "f:" + std::to_string(f.frame_id);
}

bool needs_dismissal(const FrameAnnotation& f) {
  return f.label == PopupLabel::kPopup && f.close_button.has_value();
}

}  // namespace

EndToEndCounts end_to_end_counts(std::span<const EngineEvent> log,
                                 const RecordingAnnotation& annotation) {
  std::set<std::string> episodes;
  for (const auto& f : annotation.frames) {
    if (needs_dismissal(f)) episodes.insert(episode_key(f));
  }

  EndToEndCounts counts;
  std::set<std::string> resolved;
  for (const auto& event : log) {
    const FrameAnnotation* f = annotation.find(event.frame_id);
    if (f == nullptr) {
      throw Error(ErrorCode::kFrameCoverageMismatch,
                  annotation.app_id + ": frame " + std::to_string(event.frame_id) +
                      " is logged but not annotated");
    }
    if (event.action != EngineAction::kDismissPopup) continue;
    ++counts.dismissals;
    if (event.click && needs_dismissal(*f) &&
        f->close_button->contains(event.click->x, event.click->y)) {
      ++counts.correct_dismissals;
      resolved.insert(episode_key(*f));
    }
  }
  counts.popups = static_cast<std::int64_t>(episodes.size());
  counts.popups_resolved = static_cast<std::int64_t>(resolved.size());
  counts.app_has_popups = counts.popups > 0;
  counts.app_fully_resolved = counts.app_has_popups && counts.popups_resolved == counts.popups;
  return counts;
}

EndToEndMetrics end_to_end_metrics(std::span<const EndToEndCounts> apps) {
  EndToEndCounts total;
  std::int64_t apps_with_popups = 0;
  std::int64_t apps_resolved = 0;
  for (const auto& a : apps) {
    total.dismissals += a.dismissals;
    total.correct_dismissals += a.correct_dismissals;
    total.popups += a.popups;
    total.popups_resolved += a.popups_resolved;
    apps_with_popups += a.app_has_popups ? 1 : 0;
    apps_resolved += a.app_fully_resolved ? 1 : 0;
  }
  EndToEndMetrics m;
  m.precision = ratio(total.correct_dismissals, total.dismissals);
  m.recall = ratio(total.popups_resolved, total.popups);
  m.f1 = f1_score(m.precision, m.recall);
  m.apps_fully_resolved_fraction = ratio(apps_resolved, apps_with_popups);
  return m;
}

EndToEndMetrics end_to_end_metrics(std::span<const EngineEvent> log,
                                   const RecordingAnnotation& annotation) {
  const EndToEndCounts counts = end_to_end_counts(log, annotation);
  return end_to_end_metrics(std::span<const EndToEndCounts>(&counts, 1));
}

// ---- report ---------------------------------------------------------------

EvaluationReport evaluate_recordings(std::span<const RecordingLog> recordings) {
  EvaluationReport report;
  DetectionCorpus corpus;
  std::vector<EndToEndCounts> all_counts;

  for (const auto& rec : recordings) {
    AppReport app;
    app.app_id = rec.annotation.app_id;
    app.counts = end_to_end_counts(rec.events, rec.annotation);
    app.metrics = end_to_end_metrics(std::span<const EndToEndCounts>(&app.counts, 1));
    all_counts.push_back(app.counts);
    report.apps.push_back(std::move(app));

    for (const auto& event : rec.events) {
      if (!event.forwarded) continue;
      const FrameAnnotation* f = rec.annotation.find(event.frame_id);
      if (event.verdict) {
        const bool predicted = event.verdict->label == PopupLabel::kPopup;
        const bool actual = f->label == PopupLabel::kPopup;
        auto& c = report.classification_counts;
        (predicted ? (actual ? c.tp : c.fp) : (actual ? c.fn : c.tn))++;
      }
      std::vector<Detection> preds;
      if (event.action == EngineAction::kDismissPopup && event.detection) {
        preds.push_back(*event.detection);
      }
      std::vector<BoundingBox> gts;
      if (needs_dismissal(*f)) gts.push_back(*f->close_button);
      corpus.predictions.push_back(std::move(preds));
      corpus.ground_truth.push_back(std::move(gts));
    }
  }

  const auto cls = classification_metrics(report.classification_counts);
  report.precision = cls.precision;
  report.recall = cls.recall;
  report.f1 = cls.f1;

  const DetectionMatchSet at50 = match_detections(corpus, 0.5);
  report.det_precision = ratio(at50.true_positives(),
                               static_cast<std::int64_t>(at50.ranked.size()));
  report.det_recall = ratio(at50.true_positives(), at50.ground_truth_count);
  if (at50.ground_truth_count > 0) {
    report.box_ap = average_precision(at50, ApMode::kRiemannSum);
    report.map50 = average_precision(at50, ApMode::kMonotoneEnvelope);
    report.map50_95 = map_range(corpus);
  }

  const auto e2e = end_to_end_metrics(all_counts);
  report.e2e_precision = e2e.precision;
  report.e2e_recall = e2e.recall;
  report.e2e_f1 = e2e.f1;
  report.apps_fully_resolved_fraction = e2e.apps_fully_resolved_fraction;
  return report;
}

std::string EvaluationReport::to_json() const {
  ordered_json j;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["det_precision"] = det_precision;
  j["det_recall"] = det_recall;
  j["box_ap"] = box_ap;
  j["map50"] = map50;
  j["map50_95"] = map50_95;
  j["e2e_precision"] = e2e_precision;
  j["e2e_recall"] = e2e_recall;
  j["e2e_f1"] = e2e_f1;
  j["apps_fully_resolved_fraction"] = apps_fully_resolved_fraction;
  j["classification_counts"] = {{"tp", classification_counts.tp},
                                {"fp", classification_counts.fp},
                                {"fn", classification_counts.fn},
                                {"tn", classification_counts.tn}};
  ordered_json apps_json = ordered_json::array();
  for (const auto& app : apps) {
    ordered_json a;
    a["app_id"] = app.app_id;
    a["dismissals"] = app.counts.dismissals;
    a["correct_dismissals"] = app.counts.correct_dismissals;
    a["popups"] = app.counts.popups;
    a["popups_resolved"] = app.counts.popups_resolved;
    a["fully_resolved"] = app.counts.app_fully_resolved;
    a["e2e_precision"] = app.metrics.precision;
    a["e2e_recall"] = app.metrics.recall;
    a["e2e_f1"] = app.metrics.f1;
    apps_json.push_back(std::move(a));
  }
  j["apps"] = std::move(apps_json);
  return j.dump(2);
}

}  // namespace popsweeper
