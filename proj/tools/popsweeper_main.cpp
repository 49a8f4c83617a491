// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0
//
// popsweeper serve | replay | eval | bench

#include <algorithm>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "popsweeper/change_sampler.hpp"
#include "popsweeper/engine.hpp"
#include "popsweeper/error.hpp"
#include "popsweeper/evaluation.hpp"
#include "popsweeper/replay.hpp"
#include "popsweeper/replay_source.hpp"
#include "popsweeper/stream_server.hpp"

namespace {

using namespace popsweeper;
namespace fs = std::filesystem;

struct Options {
  EngineConfig engine;
  std::optional<double> classifier_threshold;
  std::string fusion_policy = "conjunctive";
  std::string similarity_metric = "intersection";
  std::string reference_mode = "forwarded";
  std::string primary_model;
  std::string secondary_model;
  std::string detector_model;
  std::string oracle;
};

void add_engine_options(CLI::App& app, Options& o) {
  auto& s = o.engine.sampler;
  app.add_option("--interval-ms", s.interval_ms, "Sampling interval")->capture_default_str();
  app.add_option("--similarity-threshold", s.similarity_threshold,
                 "Forward frames whose histogram similarity falls below this")
      ->capture_default_str();
  app.add_option("--histogram-bins", s.bins_per_channel, "Bins per colour channel")
      ->capture_default_str();
  app.add_option("--similarity-metric", o.similarity_metric)
      ->check(CLI::IsMember({"intersection", "correlation"}))
      ->capture_default_str();
  app.add_option("--reference-mode", o.reference_mode,
                 "Compare against the last forwarded or the last considered frame")
      ->check(CLI::IsMember({"forwarded", "considered"}))
      ->capture_default_str();

  auto& c = o.engine.classifier;
  app.add_option("--classifier-threshold", o.classifier_threshold,
                 "Decision threshold for both classifier stages");
  app.add_option("--primary-threshold", c.primary_threshold)->capture_default_str();
  app.add_option("--secondary-threshold", c.secondary_threshold)->capture_default_str();
  app.add_option("--fusion-policy", o.fusion_policy)
      ->check(CLI::IsMember({"conjunctive", "primary-dominant"}))
      ->capture_default_str();
  app.add_option("--primary-model", o.primary_model, "Primary classifier ONNX file");
  app.add_option("--secondary-model", o.secondary_model, "Secondary classifier ONNX file");
  app.add_option("--detector-model", o.detector_model, "Close-button detector ONNX file");
  app.add_option("--oracle", o.oracle, "Scripted oracle JSON used in place of all models");
  app.add_option("--detector-conf-threshold", o.engine.detector_conf_threshold)
      ->capture_default_str();
  app.add_option("--max-dismiss-attempts", o.engine.max_dismiss_attempts,
                 "Consecutive dismissals per pop-up before giving up (0 = unlimited)")
      ->capture_default_str();
}

EngineConfig resolve_config(const Options& o) {
  EngineConfig config = o.engine;
  if (o.classifier_threshold) {
    config.classifier.primary_threshold = *o.classifier_threshold;
    config.classifier.secondary_threshold = *o.classifier_threshold;
  }
  config.classifier.policy = *parse_fusion_policy(o.fusion_policy);
  config.sampler.metric = o.similarity_metric == "correlation" ? SimilarityMetric::kCorrelation
                                                               : SimilarityMetric::kIntersection;
  config.sampler.reference_mode = o.reference_mode == "considered"
                                      ? ReferenceMode::kLastConsidered
                                      : ReferenceMode::kLastForwarded;
  config.validate();
  return config;
}

EngineBackends resolve_backends(const Options& o) {
  if (!o.oracle.empty()) {
    auto script = std::make_shared<const OracleScript>(OracleScript::load(o.oracle));
    return {make_oracle_backend(script, OracleField::kPrimary, BackendTask::kBinaryClassify),
            make_oracle_backend(script, OracleField::kSecondary, BackendTask::kBinaryClassify),
            make_oracle_backend(script, OracleField::kDetections, BackendTask::kDetect)};
  }
  if (o.primary_model.empty() || o.secondary_model.empty() || o.detector_model.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "either --oracle or all of --primary-model, --secondary-model and "
                "--detector-model are required");
  }
  return {load_model_backend(o.primary_model, BackendTask::kBinaryClassify),
          load_model_backend(o.secondary_model, BackendTask::kBinaryClassify),
          load_model_backend(o.detector_model, BackendTask::kDetect)};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

int run_serve(const Options& o, const std::string& listen, const std::string& log_dir) {
  const Engine engine(resolve_config(o), resolve_backends(o));
  SessionRegistry::SinkFactory sinks;
  if (!log_dir.empty()) {
    fs::create_directories(log_dir);
    sinks = [log_dir](const std::string& session) -> EventSink {
      auto out = std::make_shared<std::ofstream>(fs::path(log_dir) / (session + ".jsonl"),
                                                 std::ios::app);
      return [out](const EngineEvent& e) { *out << e.to_json_line() << '\n' << std::flush; };
    };
  }
  StreamServer server(engine, parse_listen_address(listen), sinks);
  const auto port = server.start();
  std::cerr << "popsweeper listening on port " << port << std::endl;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  return 0;
}

int run_replay(const Options& o, const std::string& frames, const std::string& annotations,
               const std::string& out, const std::string& report_path) {
  const Engine engine(resolve_config(o), resolve_backends(o));
  std::optional<RecordingAnnotation> annotation;
  if (!annotations.empty()) {
    auto recs = load_annotations(annotations);
    if (recs.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, "replay expects exactly one recording annotation");
    }
    annotation = std::move(recs.front());
  }
  const ReplayResult result = replay_command(engine, frames, annotation);
  write_text(out, result.event_log());
  std::cerr << result.frames << " frames, " << result.events.size() << " considered, "
            << result.dismissals << " dismissals\n";
  if (result.report) {
    const std::string json = result.report->to_json();
    if (report_path.empty()) {
      std::cout << json << '\n';
    } else {
      write_text(report_path, json + "\n");
    }
  }
  return 0;
}

int run_eval(const std::vector<std::string>& logs, const std::string& annotations,
             const std::string& out) {
  std::vector<EngineEvent> events;
  for (const auto& path : logs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, path + " not found");
    auto part = read_event_log(in);
    events.insert(events.end(), part.begin(), part.end());
  }
  std::map<std::string, std::vector<EngineEvent>> by_session;
  for (auto& e : events) by_session[e.session].push_back(std::move(e));

  auto recs = load_annotations(annotations);
  std::vector<RecordingLog> recordings;
  for (auto& rec : recs) {
    auto it = by_session.find(rec.app_id);
    if (it == by_session.end() && recs.size() == 1 && by_session.size() == 1) {
      it = by_session.begin();
    }
    std::vector<EngineEvent> session_events;
    if (it != by_session.end()) session_events = std::move(it->second);
    recordings.push_back({std::move(rec), std::move(session_events)});
  }
  const std::string json = evaluate_recordings(recordings).to_json();
  if (out.empty()) {
    std::cout << json << '\n';
  } else {
    write_text(out, json + "\n");
  }
  return 0;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

int run_bench(const Options& o, const std::string& frames) {
  const Engine engine(resolve_config(o), resolve_backends(o));
  const std::vector<Frame> all = load_replay(frames);
  std::vector<double> similarity_ms;
  std::vector<double> classify_ms;
  std::vector<double> detect_ms;
  std::vector<double> inference_ms;
  std::vector<double> overhead_ms;

  using Clock = std::chrono::steady_clock;
  std::optional<RgbHistogram> previous;
  for (const auto& f : all) {
    const auto start = Clock::now();
    RgbHistogram h = compute_histogram(f, engine.config().sampler.bins_per_channel);
    if (previous) (void)similarity(*previous, h, engine.config().sampler.metric);
    similarity_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
    previous = std::move(h);
  }

  SessionContext session("bench");
  for (const auto& f : all) {
    const auto start = Clock::now();
    const EngineResponse r = engine.handle_frame(session, f);
    const double wall = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (r.verdict) {
      classify_ms.push_back(r.latency.classify_ms);
      inference_ms.push_back(r.latency.inference_ms);
      overhead_ms.push_back(wall - r.latency.inference_ms);
    }
    if (r.latency.detect_ms > 0.0) detect_ms.push_back(r.latency.detect_ms);
  }

  nlohmann::ordered_json j;
  j["frames"] = all.size();
  j["forwarded"] = classify_ms.size();
  j["median_similarity_ms"] = median(similarity_ms);
  j["median_classify_ms"] = median(classify_ms);
  j["median_detect_ms"] = median(detect_ms);
  j["median_inference_ms"] = median(inference_ms);
  j["median_forwarded_overhead_ms"] = median(overhead_ms);
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time pop-up interception for automated GUI tests"};
  app.set_config("--config", "", "TOML file mirroring the command-line flags");
  app.require_subcommand(1);
  app.fallthrough();

  Options options;
  add_engine_options(app, options);

  std::string listen = "127.0.0.1:7700";
  std::string log_dir;
  auto* serve = app.add_subcommand("serve", "Run the frame-stream server");
  serve->add_option("--listen", listen, "HOST:PORT")->capture_default_str();
  serve->add_option("--log-dir", log_dir, "Write one event log per session here");

  std::string frames, annotations, out, report;
  auto* replay = app.add_subcommand("replay", "Replay a recorded frame directory");
  replay->add_option("--frames", frames, "Replay directory with manifest.json")->required();
  replay->add_option("--annotations", annotations, "Recording annotation JSON");
  replay->add_option("--out", out, "Event log (JSON lines)")->required();
  replay->add_option("--report", report, "Evaluation report JSON");

  std::vector<std::string> logs;
  std::string eval_annotations, eval_out;
  auto* eval = app.add_subcommand("eval", "Score event logs against annotations");
  eval->add_option("--log", logs, "Event log; repeatable")->required();
  eval->add_option("--annotations", eval_annotations, "Annotation JSON")->required();
  eval->add_option("--out", eval_out, "Report path (stdout when omitted)");

  std::string bench_frames;
  auto* bench = app.add_subcommand("bench", "Report per-stage latency on a replay directory");
  bench->add_option("--frames", bench_frames, "Replay directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(options, listen, log_dir);
    if (*replay) return run_replay(options, frames, annotations, out, report);
    if (*eval) return run_eval(logs, eval_annotations, eval_out);
    if (*bench) return run_bench(options, bench_frames);
  } catch (const std::exception& e) {
    std::cerr << "popsweeper: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
