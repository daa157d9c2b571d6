// voxid/voxid_main.cc

// Copyright 2026  The Voxid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Single binary with one subcommand per pipeline stage.  Exit codes:
//   0 success, 1 runtime failure, 2 usage error, 3 no vocal content.

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "voxid/audio.h"
#include "voxid/classifier.h"
#include "voxid/error.h"
#include "voxid/manifest.h"
#include "voxid/segmenter.h"
#include "voxid/separator.h"
#include "voxid/synth.h"
#include "voxid/timeline.h"

namespace voxid {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct PipelineConfig {
  std::string seg_bundle;
  std::string sep_bundle;
  std::string cls_bundle;
  seg::TransitionModel hmm;
  signal::StftConfig stft;
  double snippet_seconds = 6.0;
};

// Bundle paths inside the config resolve against the config file's directory.
PipelineConfig LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIoFailure, "cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    Throw(ErrorCode::kIoFailure, "config " + path + " is not a JSON object");
  }
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
  };
  PipelineConfig cfg;
  cfg.seg_bundle = resolve(j.value("seg_bundle", ""));
  cfg.sep_bundle = resolve(j.value("sep_bundle", ""));
  cfg.cls_bundle = resolve(j.value("cls_bundle", ""));
  if (j.contains("hmm")) {
    const json& h = j.at("hmm");
    cfg.hmm.p_stay_vocal = h.value("p_stay_vocal", cfg.hmm.p_stay_vocal);
    cfg.hmm.p_stay_nonvocal =
        h.value("p_stay_nonvocal", cfg.hmm.p_stay_nonvocal);
    cfg.hmm.prior_vocal = h.value("prior_vocal", cfg.hmm.prior_vocal);
  }
  if (j.contains("stft")) {
    const json& s = j.at("stft");
    cfg.stft.fft_size = s.value("fft_size", cfg.stft.fft_size);
    cfg.stft.hop = s.value("hop", cfg.stft.hop);
    cfg.stft.sample_rate = s.value("sample_rate", cfg.stft.sample_rate);
  }
  cfg.snippet_seconds = j.value("snippet_seconds", cfg.snippet_seconds);
  const signal::StftConfig expected;
  if (cfg.stft.fft_size != expected.fft_size ||
      cfg.stft.hop != expected.hop ||
      cfg.stft.sample_rate != expected.sample_rate) {
    Throw(ErrorCode::kInvalidArgument,
          "config stft settings do not match the settings the models were "
          "built for (fft_size 512, hop 160, sample_rate 16000)");
  }
  if (cfg.snippet_seconds <= 0.0) {
    Throw(ErrorCode::kInvalidArgument, "snippet_seconds must be positive");
  }
  return cfg;
}

std::string RequireConfigPath(const std::string& config_path,
                              const char* command) {
  if (config_path.empty()) {
    Throw(ErrorCode::kInvalidArgument,
          std::string(command) + " needs --config with the bundle paths");
  }
  return config_path;
}

// Advisory writer lock beside the bundle directory.
class BundleLock {
 public:
  explicit BundleLock(const std::string& bundle_dir)
      : path_(bundle_dir + ".lock") {
    fs::path parent = fs::path(path_).parent_path();
    if (!parent.empty()) {
      std::error_code ec;
      fs::create_directories(parent, ec);
    }
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      Throw(ErrorCode::kBundleLocked,
            "bundle lock " + path_ + " already held (remove it if stale)");
    }
  }
  ~BundleLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  BundleLock(const BundleLock&) = delete;
  BundleLock& operator=(const BundleLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

void WriteTrainingLog(const std::string& bundle_dir,
                      const nn::TrainTrace& trace) {
  json j;
  j["epoch_loss"] = trace.epoch_loss;
  const std::string path = bundle_dir + "/training_log.json";
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIoFailure, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void EmitReport(const json& j, const std::string& report_path) {
  if (report_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  fs::path parent = fs::path(report_path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  std::ofstream out(report_path);
  if (!out) Throw(ErrorCode::kIoFailure, "cannot write " + report_path);
  out << j.dump(2) << "\n";
}

json PrfToJson(const cls::PrfReport& r,
               const std::vector<std::string>& names) {
  json per_class = json::array();
  for (size_t c = 0; c < r.per_class.size(); ++c) {
    per_class.push_back({{"label", names[c]},
                         {"precision", r.per_class[c].precision},
                         {"recall", r.per_class[c].recall},
                         {"f1", r.per_class[c].f1}});
  }
  return json{{"per_class", per_class},
              {"macro_precision", r.macro_precision},
              {"macro_recall", r.macro_recall},
              {"macro_f1", r.macro_f1}};
}

json SegEvalToJson(const seg::SegEvalResult& r) {
  return json{{"precision_vocal", r.precision_vocal},
              {"precision_nonvocal", r.precision_nonvocal},
              {"mean_precision", r.mean_precision},
              {"frame_accuracy", r.frame_accuracy}};
}

struct CommonFlags {
  std::string config;
  uint64_t seed = 42;
  int threads = 1;
};

int CmdSynthData(const CommonFlags& common, const std::string& out_dir,
                 int singers, int clips, double clip_seconds) {
  (void)common.config;
  synth::DatasetPaths paths = synth::BuildDataset(
      singers, clips, clip_seconds, out_dir, common.seed);
  json j{{"segmentation_manifest", paths.segmentation_manifest},
         {"pair_manifest", paths.pair_manifest},
         {"classification_manifest", paths.classification_manifest},
         {"dataset_json", paths.dataset_json}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int CmdTrainSeg(const CommonFlags& common, const std::string& data,
                const std::string& out, int epochs, int steps, int batch,
                double lr) {
  std::vector<SegmentationItem> items = ReadSegmentationManifest(data);
  seg::SegmenterConfig cfg;
  seg::SegTrainOptions opt;
  opt.epochs = epochs;
  opt.steps_per_epoch = steps;
  opt.batch = batch;
  opt.seed = common.seed;
  opt.learning_rate = lr;
  nn::ParameterSet params;
  nn::TrainTrace trace = seg::TrainSegmenter(items, cfg, opt, params);
  BundleLock lock(out);
  seg::SaveSegmenterBundle(out, cfg, params);
  WriteTrainingLog(out, trace);
  return 0;
}

int CmdTrainSep(const CommonFlags& common, const std::string& data,
                const std::string& out, int epochs, int steps, int batch,
                double lr, const std::string& skip_kind) {
  std::vector<PairItem> pairs = ReadPairManifest(data);
  sep::SeparatorConfig cfg;
  cfg.skip_kind = sep::SkipKindFromName(skip_kind);
  sep::SepTrainOptions opt;
  opt.epochs = epochs;
  opt.steps_per_epoch = steps;
  opt.batch = batch;
  opt.seed = common.seed;
  opt.learning_rate = lr;
  nn::ParameterSet params;
  nn::TrainTrace trace = sep::TrainSeparator(pairs, cfg, opt, params);
  BundleLock lock(out);
  sep::SaveSeparatorBundle(out, cfg, params);
  WriteTrainingLog(out, trace);
  return 0;
}

int CmdTrainCls(const CommonFlags& common, const std::string& data,
                const std::string& out, int epochs, int steps, int batch,
                double lr) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "train-cls"));
  nn::ParameterSet seg_params, sep_params;
  cls::FrontEnd fe;
  fe.seg_cfg = seg::LoadSegmenterBundle(pc.seg_bundle, seg_params);
  fe.sep_cfg = sep::LoadSeparatorBundle(pc.sep_bundle, sep_params);
  fe.seg_params = &seg_params;
  fe.sep_params = &sep_params;
  fe.transitions = pc.hmm;
  fe.sep_cfg.snippet_seconds = pc.snippet_seconds;

  std::vector<ClassificationItem> items = ReadClassificationManifest(data);
  cls::LabelMap labels = cls::LabelMapFromItems(items);
  std::vector<std::pair<signal::FeatureMatrix, int>> train_data;
  for (const ClassificationItem& item : items) {
    signal::AudioBuffer song = signal::ReadWav(item.path);
    const int label = labels.IndexOf(item.singer);
    for (signal::FeatureMatrix& f :
         cls::SnippetFeatures(song, fe, /*use_separator=*/true)) {
      train_data.emplace_back(std::move(f), label);
    }
  }
  cls::ClassifierConfig cfg;
  cfg.num_singers = labels.Size();
  cls::ClsTrainOptions opt;
  opt.epochs = epochs;
  opt.steps_per_epoch = steps;
  opt.batch = batch;
  opt.seed = common.seed;
  opt.learning_rate = lr;
  nn::ParameterSet params;
  nn::TrainTrace trace = cls::TrainClassifier(train_data, cfg, opt, params);
  BundleLock lock(out);
  cls::SaveClassifierBundle(out, cfg, labels, params);
  WriteTrainingLog(out, trace);
  return 0;
}

int CmdSegment(const CommonFlags& common, const std::string& in,
               const std::string& out) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "segment"));
  nn::ParameterSet params;
  seg::SegmenterConfig cfg = seg::LoadSegmenterBundle(pc.seg_bundle, params);
  signal::AudioBuffer song = signal::ReadWav(in);
  seg::FrameProbs probs = seg::FrameProbabilities(song, params, cfg);
  std::vector<SegmentLabel> labels = seg::ViterbiSmooth(probs, pc.hmm);
  SegmentTimeline timeline =
      seg::TimelineFromLabels(labels, probs.hop_seconds);
  const std::string text = TimelineToJson(timeline, probs.hop_seconds);
  if (out.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(out);
    if (!f) Throw(ErrorCode::kIoFailure, "cannot write " + out);
    f << text << "\n";
  }
  return 0;
}

int CmdSeparate(const CommonFlags& common, const std::string& in,
                const std::string& out) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "separate"));
  nn::ParameterSet params;
  sep::SeparatorConfig cfg = sep::LoadSeparatorBundle(pc.sep_bundle, params);
  cfg.snippet_seconds = pc.snippet_seconds;
  signal::AudioBuffer mixture = signal::ReadWav(in);
  sep::SeparationResult result = sep::Separate(mixture, params, cfg);
  signal::WriteWav(out, result.vocal_audio);
  return 0;
}

int CmdIdentify(const CommonFlags& common, const std::string& in, bool raw) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "identify"));
  nn::ParameterSet seg_params, sep_params, cls_params;
  cls::FrontEnd fe;
  fe.seg_cfg = seg::LoadSegmenterBundle(pc.seg_bundle, seg_params);
  fe.sep_cfg = sep::LoadSeparatorBundle(pc.sep_bundle, sep_params);
  fe.seg_params = &seg_params;
  fe.sep_params = &sep_params;
  fe.transitions = pc.hmm;
  fe.sep_cfg.snippet_seconds = pc.snippet_seconds;
  cls::LabelMap labels;
  cls::ClassifierConfig cls_cfg =
      cls::LoadClassifierBundle(pc.cls_bundle, cls_params, labels);

  signal::AudioBuffer song = signal::ReadWav(in);
  cls::Prediction pred =
      cls::PredictSong(song, fe, cls_params, cls_cfg, !raw);

  json dist = json::object();
  for (int c = 0; c < labels.Size(); ++c) {
    dist[labels.names[c]] = pred.distribution[c];
  }
  json snippets = json::array();
  for (const std::vector<double>& d : pred.snippet_distributions) {
    snippets.push_back(d);
  }
  json j{{"singer", labels.names[pred.singer]},
         {"prob", pred.distribution[pred.singer]},
         {"distribution", dist},
         {"snippets", snippets}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int CmdEvalSeg(const CommonFlags& common, const std::string& data,
               const std::string& report) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "eval-seg"));
  nn::ParameterSet params;
  seg::SegmenterConfig cfg = seg::LoadSegmenterBundle(pc.seg_bundle, params);
  std::vector<SegmentationItem> items = ReadSegmentationManifest(data);
  if (items.empty()) {
    Throw(ErrorCode::kInvalidArgument, "manifest " + data + " is empty");
  }

  seg::SegEvalResult cnn_sum, vit_sum;
  auto accumulate = [](seg::SegEvalResult& sum, const seg::SegEvalResult& r) {
    sum.precision_vocal += r.precision_vocal;
    sum.precision_nonvocal += r.precision_nonvocal;
    sum.mean_precision += r.mean_precision;
    sum.frame_accuracy += r.frame_accuracy;
  };
  for (const SegmentationItem& item : items) {
    signal::AudioBuffer song = signal::ReadWav(item.path);
    seg::FrameProbs probs = seg::FrameProbabilities(song, params, cfg);
    std::vector<SegmentLabel> cnn_labels(probs.p_vocal.size());
    for (size_t t = 0; t < probs.p_vocal.size(); ++t) {
      cnn_labels[t] = probs.p_vocal[t] > 0.5 ? SegmentLabel::kVocal
                                             : SegmentLabel::kNonVocal;
    }
    SegmentTimeline cnn_tl =
        seg::TimelineFromLabels(cnn_labels, probs.hop_seconds,
                                /*min_segment_s=*/0.0);
    std::vector<SegmentLabel> vit_labels = seg::ViterbiSmooth(probs, pc.hmm);
    SegmentTimeline vit_tl =
        seg::TimelineFromLabels(vit_labels, probs.hop_seconds);
    accumulate(cnn_sum, seg::EvalSegmentation(cnn_tl, item.timeline));
    accumulate(vit_sum, seg::EvalSegmentation(vit_tl, item.timeline));
  }
  const double n = static_cast<double>(items.size());
  auto mean = [n](seg::SegEvalResult r) {
    r.precision_vocal /= n;
    r.precision_nonvocal /= n;
    r.mean_precision /= n;
    r.frame_accuracy /= n;
    return r;
  };
  json j{{"num_items", items.size()},
         {"cnn", SegEvalToJson(mean(cnn_sum))},
         {"cnn_viterbi", SegEvalToJson(mean(vit_sum))}};
  EmitReport(j, report);
  return 0;
}

int CmdEvalSep(const CommonFlags& common, const std::string& data,
               const std::string& report) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "eval-sep"));
  nn::ParameterSet params;
  sep::SeparatorConfig cfg = sep::LoadSeparatorBundle(pc.sep_bundle, params);
  cfg.snippet_seconds = pc.snippet_seconds;
  std::vector<PairItem> pairs = ReadPairManifest(data);
  sep::SepEvalResult r = sep::EvalSeparation(pairs, params, cfg);
  json per_track = json::array();
  for (const sep::SepEvalTrack& t : r.per_track) {
    per_track.push_back(
        {{"id", t.id}, {"si_sdr", t.si_sdr}, {"baseline", t.baseline}});
  }
  json j{{"per_track", per_track},
         {"median_si_sdr", r.median_si_sdr},
         {"mean_si_sdr", r.mean_si_sdr},
         {"median_baseline", r.median_baseline},
         {"mean_baseline", r.mean_baseline},
         {"median_improvement", r.median_improvement},
         {"mean_improvement", r.mean_improvement}};
  EmitReport(j, report);
  return 0;
}

int CmdEvalCls(const CommonFlags& common, const std::string& data,
               const std::string& report, int folds, int epochs, int steps,
               int batch) {
  PipelineConfig pc =
      LoadPipelineConfig(RequireConfigPath(common.config, "eval-cls"));
  nn::ParameterSet seg_params, sep_params;
  cls::FrontEnd fe;
  fe.seg_cfg = seg::LoadSegmenterBundle(pc.seg_bundle, seg_params);
  fe.sep_cfg = sep::LoadSeparatorBundle(pc.sep_bundle, sep_params);
  fe.seg_params = &seg_params;
  fe.sep_params = &sep_params;
  fe.transitions = pc.hmm;
  fe.sep_cfg.snippet_seconds = pc.snippet_seconds;

  std::vector<ClassificationItem> items = ReadClassificationManifest(data);
  cls::CvOptions opt;
  opt.folds = folds;
  opt.seed = common.seed;
  opt.train.epochs = epochs;
  opt.train.steps_per_epoch = steps;
  opt.train.batch = batch;
  cls::CvResult r = cls::EvalClassifierCv(items, fe, opt);

  auto variant = [&](const cls::CvVariantResult& v) {
    json per_fold = json::array();
    for (const cls::PrfReport& f : v.per_fold_song) {
      per_fold.push_back(PrfToJson(f, r.labels.names));
    }
    return json{{"song_level", PrfToJson(v.song_level, r.labels.names)},
                {"snippet_level", PrfToJson(v.snippet_level, r.labels.names)},
                {"per_fold_song", per_fold}};
  };
  json j{{"labels", r.labels.names},
         {"folds", folds},
         {"separated", variant(r.separated)},
         {"raw", variant(r.raw)}};
  EmitReport(j, report);
  return 0;
}

int Run(int argc, char** argv) {
  CLI::App app{"voxid: singer identification for song snippets"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--config", common.config,
                 "Pipeline config JSON (bundle paths, HMM, snippet length)");
  app.add_option("--seed", common.seed, "Root random seed")
      ->default_val(uint64_t{42});
  app.add_option("--threads", common.threads,
                 "Reserved; all stages currently run single-threaded")
      ->default_val(1)
      ->check(CLI::PositiveNumber);

  // synth-data
  auto* sd = app.add_subcommand("synth-data", "Generate a synthetic dataset");
  std::string sd_out;
  int sd_singers = 6, sd_clips = 20;
  double sd_clip_seconds = 10.0;
  sd->add_option("--out", sd_out, "Output directory")->required();
  sd->add_option("--singers", sd_singers, "Number of singers")
      ->default_val(6);
  sd->add_option("--clips-per-singer", sd_clips, "Clips per singer")
      ->default_val(20);
  sd->add_option("--clip-seconds", sd_clip_seconds, "Clip length in seconds")
      ->default_val(10.0);

  // train-* shared flags
  struct TrainFlags {
    std::string data, out;
    int epochs = 0, steps = 0, batch = 0;
    double lr = 0.001;
  };
  auto add_train_flags = [](CLI::App* cmd, TrainFlags& f, int epochs,
                            int steps, int batch) {
    f.epochs = epochs;
    f.steps = steps;
    f.batch = batch;
    cmd->add_option("--data", f.data, "Training manifest (JSONL)")
        ->required();
    cmd->add_option("--out", f.out, "Output bundle directory")->required();
    cmd->add_option("--epochs", f.epochs, "Training epochs")
        ->default_val(epochs);
    cmd->add_option("--steps-per-epoch", f.steps, "Batches per epoch")
        ->default_val(steps);
    cmd->add_option("--batch", f.batch, "Batch size")->default_val(batch);
    cmd->add_option("--lr", f.lr, "Adam learning rate")->default_val(0.001);
  };

  auto* tseg =
      app.add_subcommand("train-seg", "Train the vocal-activity segmenter");
  TrainFlags tseg_f;
  add_train_flags(tseg, tseg_f, seg::SegTrainOptions{}.epochs,
                  seg::SegTrainOptions{}.steps_per_epoch,
                  seg::SegTrainOptions{}.batch);

  auto* tsep =
      app.add_subcommand("train-sep", "Train the vocal source separator");
  TrainFlags tsep_f;
  std::string tsep_skip = "gru";
  add_train_flags(tsep, tsep_f, sep::SepTrainOptions{}.epochs,
                  sep::SepTrainOptions{}.steps_per_epoch,
                  sep::SepTrainOptions{}.batch);
  tsep->add_option("--skip-kind", tsep_skip, "Recurrent skip cell")
      ->default_val("gru")
      ->check(CLI::IsMember({"gru", "lstm"}));

  auto* tcls =
      app.add_subcommand("train-cls", "Train the singer classifier");
  TrainFlags tcls_f;
  add_train_flags(tcls, tcls_f, cls::ClsTrainOptions{}.epochs,
                  cls::ClsTrainOptions{}.steps_per_epoch,
                  cls::ClsTrainOptions{}.batch);

  // segment / separate / identify
  auto* seg_cmd =
      app.add_subcommand("segment", "Vocal-activity timeline for one file");
  std::string seg_in, seg_out;
  seg_cmd->add_option("--in", seg_in, "Input WAV")->required();
  seg_cmd->add_option("--out", seg_out, "Timeline JSON path (default stdout)");

  auto* sep_cmd =
      app.add_subcommand("separate", "Vocal stem estimate for one file");
  std::string sep_in, sep_out;
  sep_cmd->add_option("--in", sep_in, "Input WAV")->required();
  sep_cmd->add_option("--out", sep_out, "Output vocal WAV")->required();

  auto* id_cmd =
      app.add_subcommand("identify", "Identify the singer of one file");
  std::string id_in;
  bool id_raw = false;
  id_cmd->add_option("--in", id_in, "Input WAV")->required();
  id_cmd->add_flag("--raw", id_raw,
                   "Classify mixture features (skip separation)");

  // eval-*
  auto* eseg = app.add_subcommand("eval-seg", "Segmentation report");
  std::string eseg_data, eseg_report;
  eseg->add_option("--data", eseg_data, "Segmentation manifest")->required();
  eseg->add_option("--report", eseg_report, "Report path (default stdout)");

  auto* esep = app.add_subcommand("eval-sep", "Separation report");
  std::string esep_data, esep_report;
  esep->add_option("--data", esep_data, "Snippet-pair manifest")->required();
  esep->add_option("--report", esep_report, "Report path (default stdout)");

  auto* ecls =
      app.add_subcommand("eval-cls", "Cross-validated classification report");
  std::string ecls_data, ecls_report;
  int ecls_folds = 5;
  int ecls_epochs = cls::ClsTrainOptions{}.epochs;
  int ecls_steps = cls::ClsTrainOptions{}.steps_per_epoch;
  int ecls_batch = cls::ClsTrainOptions{}.batch;
  ecls->add_option("--data", ecls_data, "Classification manifest")
      ->required();
  ecls->add_option("--report", ecls_report, "Report path (default stdout)");
  ecls->add_option("--folds", ecls_folds, "Cross-validation folds")
      ->default_val(5);
  ecls->add_option("--epochs", ecls_epochs, "Per-fold training epochs")
      ->default_val(cls::ClsTrainOptions{}.epochs);
  ecls->add_option("--steps-per-epoch", ecls_steps,
                   "Per-fold batches per epoch")
      ->default_val(cls::ClsTrainOptions{}.steps_per_epoch);
  ecls->add_option("--batch", ecls_batch, "Per-fold batch size")
      ->default_val(cls::ClsTrainOptions{}.batch);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (sd->parsed()) {
    return CmdSynthData(common, sd_out, sd_singers, sd_clips,
                        sd_clip_seconds);
  }
  if (tseg->parsed()) {
    return CmdTrainSeg(common, tseg_f.data, tseg_f.out, tseg_f.epochs,
                       tseg_f.steps, tseg_f.batch, tseg_f.lr);
  }
  if (tsep->parsed()) {
    return CmdTrainSep(common, tsep_f.data, tsep_f.out, tsep_f.epochs,
                       tsep_f.steps, tsep_f.batch, tsep_f.lr, tsep_skip);
  }
  if (tcls->parsed()) {
    return CmdTrainCls(common, tcls_f.data, tcls_f.out, tcls_f.epochs,
                       tcls_f.steps, tcls_f.batch, tcls_f.lr);
  }
  if (seg_cmd->parsed()) return CmdSegment(common, seg_in, seg_out);
  if (sep_cmd->parsed()) return CmdSeparate(common, sep_in, sep_out);
  if (id_cmd->parsed()) return CmdIdentify(common, id_in, id_raw);
  if (eseg->parsed()) return CmdEvalSeg(common, eseg_data, eseg_report);
  if (esep->parsed()) return CmdEvalSep(common, esep_data, esep_report);
  if (ecls->parsed()) {
    return CmdEvalCls(common, ecls_data, ecls_report, ecls_folds,
                      ecls_epochs, ecls_steps, ecls_batch);
  }
  return 0;
}

}  // namespace
}  // namespace voxid

int main(int argc, char** argv) {
  try {
    return voxid::Run(argc, argv);
  } catch (const voxid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == voxid::ErrorCode::kNoVocalContent ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
