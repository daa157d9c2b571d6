// voxid/segmenter.cc

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

#include "voxid/segmenter.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "voxid/bundle.h"
#include "voxid/error.h"
#include "voxid/stft.h"

namespace voxid::seg {

namespace {

using nn::Tensor;
using nn::Var;

constexpr int kEvalBatch = 64;
constexpr const char* kArchitecture = "segnet-v1";

// Pooled activation sizes; maxpool truncates trailing remainders.
int PooledFlatDims(const SegmenterConfig& cfg) {
  int h = cfg.window_frames / cfg.pool1 / cfg.pool2;
  int w = cfg.feature_dims / cfg.pool1 / cfg.pool2;
  return h * w * cfg.conv2_filters;
}

// Copies the window centered on `center` with replicate edge padding into
// dst[window_frames * feature_dims].
void CopyWindow(const signal::FeatureMatrix& feats, int center,
                const SegmenterConfig& cfg, double* dst) {
  const int frames = feats.NumFrames();
  const int half = cfg.window_frames / 2;
  for (int r = 0; r < cfg.window_frames; ++r) {
    int src = std::clamp(center - half + r, 0, frames - 1);
    const std::vector<double>& row = feats.data[src];
    std::copy(row.begin(), row.end(), dst + int64_t{r} * cfg.feature_dims);
  }
}

}  // namespace

void InitSegmenterParams(nn::ParameterSet& params, const SegmenterConfig& cfg,
                         Rng& rng) {
  const int k1 = cfg.conv1_kernel, k2 = cfg.conv2_kernel;
  params.Create("conv1.k",
                Tensor::GlorotInit({cfg.conv1_filters, 1, k1, k1}, k1 * k1,
                                   cfg.conv1_filters * k1 * k1, rng));
  params.Create("conv1.b", Tensor::Zeros({cfg.conv1_filters}));
  params.Create("conv2.k",
                Tensor::GlorotInit({cfg.conv2_filters, cfg.conv1_filters, k2,
                                    k2},
                                   cfg.conv1_filters * k2 * k2,
                                   cfg.conv2_filters * k2 * k2, rng));
  params.Create("conv2.b", Tensor::Zeros({cfg.conv2_filters}));
  const int flat = PooledFlatDims(cfg);
  params.Create("fc1.w",
                Tensor::GlorotInit({flat, cfg.dense1}, flat, cfg.dense1, rng));
  params.Create("fc1.b", Tensor::Zeros({cfg.dense1}));
  params.Create("fc2.w", Tensor::GlorotInit({cfg.dense1, cfg.dense2},
                                            cfg.dense1, cfg.dense2, rng));
  params.Create("fc2.b", Tensor::Zeros({cfg.dense2}));
  params.Create("out.w", Tensor::GlorotInit({cfg.dense2, cfg.classes},
                                            cfg.dense2, cfg.classes, rng));
  params.Create("out.b", Tensor::Zeros({cfg.classes}));
}

nn::Var SegnetLogits(nn::Tape& tape, nn::ParameterSet& params,
                     const SegmenterConfig& cfg, nn::Var windows, Rng& rng) {
  const Tensor& x = tape.value(windows);
  if (x.ndim() != 4 || x.dim(1) != 1 || x.dim(2) != cfg.window_frames ||
      x.dim(3) != cfg.feature_dims) {
    Throw(ErrorCode::kShapeMismatch,
          "segmenter expects windows [batch, 1, " +
              std::to_string(cfg.window_frames) + ", " +
              std::to_string(cfg.feature_dims) + "], got " +
              nn::ShapeToString(x.shape()));
  }
  const int batch = x.dim(0);
  Var h = tape.conv2d_same(windows, tape.param(params.Get("conv1.k")),
                           tape.param(params.Get("conv1.b")));
  h = tape.relu(h);
  h = tape.maxpool2d(h, cfg.pool1, cfg.pool1);
  h = tape.conv2d_same(h, tape.param(params.Get("conv2.k")),
                       tape.param(params.Get("conv2.b")));
  h = tape.relu(h);
  h = tape.maxpool2d(h, cfg.pool2, cfg.pool2);
  h = tape.reshape(h, {batch, PooledFlatDims(cfg)});
  h = tape.dense(h, tape.param(params.Get("fc1.w")),
                 tape.param(params.Get("fc1.b")));
  h = tape.relu(h);
  h = tape.dropout(h, cfg.drop1, rng);
  h = tape.dense(h, tape.param(params.Get("fc2.w")),
                 tape.param(params.Get("fc2.b")));
  h = tape.relu(h);
  h = tape.dropout(h, cfg.drop2, rng);
  return tape.dense(h, tape.param(params.Get("out.w")),
                    tape.param(params.Get("out.b")));
}

double SegnetForward(nn::ParameterSet& params, const SegmenterConfig& cfg,
                     const std::vector<std::vector<double>>& window) {
  if (static_cast<int>(window.size()) != cfg.window_frames) {
    Throw(ErrorCode::kShapeMismatch,
          "window must have " + std::to_string(cfg.window_frames) +
              " frames, got " + std::to_string(window.size()));
  }
  Tensor x({1, 1, cfg.window_frames, cfg.feature_dims});
  for (int r = 0; r < cfg.window_frames; ++r) {
    if (static_cast<int>(window[r].size()) != cfg.feature_dims) {
      Throw(ErrorCode::kShapeMismatch,
            "window row " + std::to_string(r) + " must have " +
                std::to_string(cfg.feature_dims) + " dims, got " +
                std::to_string(window[r].size()));
    }
    std::copy(window[r].begin(), window[r].end(),
              x.data() + int64_t{r} * cfg.feature_dims);
  }
  Rng unused(0);
  nn::Tape tape(false);
  Var logits = SegnetLogits(tape, params, cfg, tape.constant(std::move(x)),
                            unused);
  Tensor probs = nn::SoftmaxRows(tape.value(logits));
  return probs.At(0, 1);
}

signal::FeatureMatrix SegmenterFeatures(const signal::AudioBuffer& song) {
  signal::AudioBuffer audio = signal::Resample(song, signal::kPipelineSampleRate);
  signal::StftConfig cfg = signal::DefaultStftConfig();
  signal::ComplexSpectrogram spec = signal::Stft(audio, cfg);
  signal::FeatureMatrix mfcc = signal::Mfcc(spec);
  signal::FeatureMatrix mel = signal::LogMelEnergies(spec, 7);
  signal::FeatureMatrix out;
  out.hop_seconds = cfg.HopSeconds();
  out.data.resize(mfcc.NumFrames());
  for (int t = 0; t < mfcc.NumFrames(); ++t) {
    out.data[t] = mfcc.data[t];
    out.data[t].insert(out.data[t].end(), mel.data[t].begin(),
                       mel.data[t].end());
  }
  return out;
}

FrameProbs FrameProbabilities(const signal::AudioBuffer& song,
                              nn::ParameterSet& params,
                              const SegmenterConfig& cfg) {
  if (song.DurationSeconds() < 0.5) {
    Throw(ErrorCode::kInvalidArgument,
          "segmentation needs at least 500 ms of audio, got " +
              std::to_string(song.DurationSeconds()) + " s");
  }
  signal::FeatureMatrix feats = SegmenterFeatures(song);
  if (feats.Dims() != cfg.feature_dims) {
    Throw(ErrorCode::kShapeMismatch,
          "feature dims " + std::to_string(feats.Dims()) +
              " do not match segmenter input " +
              std::to_string(cfg.feature_dims));
  }
  const int frames = feats.NumFrames();
  FrameProbs out;
  out.hop_seconds = feats.hop_seconds;
  out.p_vocal.resize(frames);
  Rng unused(0);
  const int64_t window_elems =
      int64_t{cfg.window_frames} * cfg.feature_dims;
  for (int begin = 0; begin < frames; begin += kEvalBatch) {
    const int n = std::min(kEvalBatch, frames - begin);
    Tensor wins({n, 1, cfg.window_frames, cfg.feature_dims});
    for (int i = 0; i < n; ++i) {
      CopyWindow(feats, begin + i, cfg, wins.data() + i * window_elems);
    }
    nn::Tape tape(false);
    Var logits =
        SegnetLogits(tape, params, cfg, tape.constant(std::move(wins)),
                     unused);
    Tensor probs = nn::SoftmaxRows(tape.value(logits));
    for (int i = 0; i < n; ++i) out.p_vocal[begin + i] = probs.At(i, 1);
  }
  return out;
}

std::vector<SegmentLabel> ViterbiSmooth(const FrameProbs& probs,
                                        const TransitionModel& tm) {
  if (probs.p_vocal.empty()) {
    Throw(ErrorCode::kInvalidArgument, "empty probability sequence");
  }
  auto open01 = [](double p) { return p > 0.0 && p < 1.0; };
  if (!open01(tm.p_stay_vocal) || !open01(tm.p_stay_nonvocal) ||
      !open01(tm.prior_vocal)) {
    Throw(ErrorCode::kInvalidArgument,
          "transition probabilities must lie in (0,1)");
  }
  const int T = static_cast<int>(probs.p_vocal.size());
  auto safe_log = [](double p) { return std::log(std::max(p, 1e-300)); };
  // State 0 = non_vocal, state 1 = vocal.
  const double log_trans[2][2] = {
      {safe_log(tm.p_stay_nonvocal), safe_log(1.0 - tm.p_stay_nonvocal)},
      {safe_log(1.0 - tm.p_stay_vocal), safe_log(tm.p_stay_vocal)}};
  auto emit = [&](int t, int s) {
    double p = std::clamp(probs.p_vocal[t], 0.0, 1.0);
    return safe_log(s == 1 ? p : 1.0 - p);
  };
  std::vector<uint8_t> backptr(static_cast<size_t>(T) * 2);
  double prev[2] = {safe_log(1.0 - tm.prior_vocal) + emit(0, 0),
                    safe_log(tm.prior_vocal) + emit(0, 1)};
  for (int t = 1; t < T; ++t) {
    double cur[2];
    for (int s = 0; s < 2; ++s) {
      // Strict comparison keeps ties on the non_vocal predecessor.
      int from = 0;
      double best = prev[0] + log_trans[0][s];
      if (prev[1] + log_trans[1][s] > best) {
        best = prev[1] + log_trans[1][s];
        from = 1;
      }
      cur[s] = best + emit(t, s);
      backptr[static_cast<size_t>(t) * 2 + s] = static_cast<uint8_t>(from);
    }
    prev[0] = cur[0];
    prev[1] = cur[1];
  }
  int s = prev[1] > prev[0] ? 1 : 0;
  std::vector<SegmentLabel> labels(T);
  for (int t = T - 1; t >= 0; --t) {
    labels[t] = s == 1 ? SegmentLabel::kVocal : SegmentLabel::kNonVocal;
    if (t > 0) s = backptr[static_cast<size_t>(t) * 2 + s];
  }
  return labels;
}

SegmentTimeline TimelineFromLabels(const std::vector<SegmentLabel>& labels,
                                   double hop_seconds, double min_segment_s) {
  if (labels.empty()) {
    Throw(ErrorCode::kInvalidArgument, "empty label sequence");
  }
  if (hop_seconds <= 0.0) {
    Throw(ErrorCode::kInvalidArgument, "hop must be positive");
  }
  struct Run {
    int len;
    SegmentLabel label;
  };
  std::vector<Run> runs;
  for (const SegmentLabel label : labels) {
    if (!runs.empty() && runs.back().label == label) {
      ++runs.back().len;
    } else {
      runs.push_back({1, label});
    }
  }
  const int min_frames =
      static_cast<int>(std::llround(min_segment_s / hop_seconds));
  auto coalesce = [&runs]() {
    for (size_t i = 1; i < runs.size();) {
      if (runs[i].label == runs[i - 1].label) {
        runs[i - 1].len += runs[i].len;
        runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }
  };
  while (runs.size() > 1) {
    int victim = -1;
    for (size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].len < min_frames &&
          (victim < 0 || runs[i].len < runs[victim].len)) {
        victim = static_cast<int>(i);
      }
    }
    if (victim < 0) break;
    const int left = victim - 1;
    const int right = victim + 1;
    int target;
    if (left < 0) {
      target = right;
    } else if (right >= static_cast<int>(runs.size())) {
      target = left;
    } else {
      target = runs[left].len >= runs[right].len ? left : right;
    }
    runs[target].len += runs[victim].len;
    runs.erase(runs.begin() + victim);
    coalesce();
  }
  SegmentTimeline timeline;
  int frame = 0;
  for (const Run& run : runs) {
    Segment s;
    s.start_s = frame * hop_seconds;
    frame += run.len;
    s.end_s = frame * hop_seconds;
    s.label = run.label;
    timeline.segments.push_back(s);
  }
  return timeline;
}

nn::TrainTrace TrainSegmenter(const std::vector<SegmentationItem>& data,
                              const SegmenterConfig& cfg,
                              const SegTrainOptions& opt,
                              nn::ParameterSet& params) {
  if (data.empty()) {
    Throw(ErrorCode::kInvalidArgument, "segmentation manifest is empty");
  }
  if (params.size() != 0) {
    Throw(ErrorCode::kInvalidArgument,
          "parameter set must be empty before training");
  }
  std::vector<signal::FeatureMatrix> feats;
  feats.reserve(data.size());
  // (song, frame) pools per class; index 1 = vocal.
  std::vector<std::pair<int, int>> pool[2];
  for (size_t i = 0; i < data.size(); ++i) {
    signal::AudioBuffer audio = signal::ReadWav(data[i].path);
    feats.push_back(SegmenterFeatures(audio));
    const signal::FeatureMatrix& f = feats.back();
    for (int t = 0; t < f.NumFrames(); ++t) {
      const double mid = (t + 0.5) * f.hop_seconds;
      const int cls =
          data[i].timeline.LabelAt(mid) == SegmentLabel::kVocal ? 1 : 0;
      pool[cls].push_back({static_cast<int>(i), t});
    }
  }
  if (pool[0].empty() || pool[1].empty()) {
    Throw(ErrorCode::kInvalidArgument,
          "training data contains a single class; need both vocal and "
          "non_vocal frames");
  }
  Rng root(opt.seed);
  Rng init_rng = root.Fork(1);
  Rng sample_rng = root.Fork(2);
  Rng drop_rng = root.Fork(3);
  InitSegmenterParams(params, cfg, init_rng);
  nn::AdamConfig adam;
  adam.learning_rate = opt.learning_rate;
  const int64_t window_elems =
      int64_t{cfg.window_frames} * cfg.feature_dims;
  nn::TrainTrace trace;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int step = 0; step < opt.steps_per_epoch; ++step) {
      Tensor wins({opt.batch, 1, cfg.window_frames, cfg.feature_dims});
      std::vector<int> labels(opt.batch);
      for (int i = 0; i < opt.batch; ++i) {
        const int cls = i < opt.batch / 2 ? 1 : 0;
        const auto [song, frame] =
            pool[cls][sample_rng.NextBelow(pool[cls].size())];
        CopyWindow(feats[song], frame, cfg, wins.data() + i * window_elems);
        labels[i] = cls;
      }
      nn::Tape tape(true);
      Var logits = SegnetLogits(tape, params, cfg,
                                tape.constant(std::move(wins)), drop_rng);
      nn::Tape::XentResult res = tape.softmax_xent(logits, labels);
      loss_sum += tape.value(res.loss)[0];
      tape.backward(res.loss);
      nn::AdamStep(params, adam);
    }
    trace.epoch_loss.push_back(loss_sum / opt.steps_per_epoch);
  }
  return trace;
}

SegEvalResult EvalSegmentation(const SegmentTimeline& pred,
                               const SegmentTimeline& truth) {
  const double hop = 0.010;
  const double dp = pred.TotalSeconds();
  const double dt = truth.TotalSeconds();
  if (std::abs(dp - dt) > hop + 1e-9) {
    Throw(ErrorCode::kInvalidArgument,
          "timeline durations differ by more than one frame: " +
              std::to_string(dp) + " vs " + std::to_string(dt));
  }
  const int frames = static_cast<int>(std::llround(dt / hop));
  if (frames <= 0) {
    Throw(ErrorCode::kInvalidArgument, "timelines cover no frames");
  }
  int64_t true_pos[2] = {0, 0};
  int64_t predicted[2] = {0, 0};
  int64_t correct = 0;
  for (int i = 0; i < frames; ++i) {
    const double mid = (i + 0.5) * hop;
    const int p = pred.LabelAt(mid) == SegmentLabel::kVocal ? 1 : 0;
    const int g = truth.LabelAt(mid) == SegmentLabel::kVocal ? 1 : 0;
    ++predicted[p];
    if (p == g) {
      ++true_pos[p];
      ++correct;
    }
  }
  SegEvalResult out;
  out.precision_vocal =
      predicted[1] > 0 ? static_cast<double>(true_pos[1]) / predicted[1] : 0.0;
  out.precision_nonvocal =
      predicted[0] > 0 ? static_cast<double>(true_pos[0]) / predicted[0] : 0.0;
  out.mean_precision = 0.5 * (out.precision_vocal + out.precision_nonvocal);
  out.frame_accuracy = static_cast<double>(correct) / frames;
  return out;
}

void SaveSegmenterBundle(const std::string& dir, const SegmenterConfig& cfg,
                         const nn::ParameterSet& params) {
  nn::BundleInfo info;
  info.architecture = kArchitecture;
  info.hyperparameters = {
      {"window_frames", cfg.window_frames},
      {"feature_dims", cfg.feature_dims},
      {"conv1_filters", cfg.conv1_filters},
      {"conv1_kernel", cfg.conv1_kernel},
      {"conv2_filters", cfg.conv2_filters},
      {"conv2_kernel", cfg.conv2_kernel},
      {"pool1", cfg.pool1},
      {"pool2", cfg.pool2},
      {"dense1", cfg.dense1},
      {"dense2", cfg.dense2},
      {"drop1", cfg.drop1},
      {"drop2", cfg.drop2},
      {"classes", cfg.classes},
  };
  nn::SaveBundle(dir, info, params);
}

SegmenterConfig LoadSegmenterBundle(const std::string& dir,
                                    nn::ParameterSet& params) {
  nn::BundleInfo info = nn::LoadBundle(dir, params);
  if (info.architecture != kArchitecture) {
    Throw(ErrorCode::kBadBundle,
          "expected architecture " + std::string(kArchitecture) + ", found " +
              info.architecture);
  }
  SegmenterConfig cfg;
  const nlohmann::json& h = info.hyperparameters;
  cfg.window_frames = h.value("window_frames", cfg.window_frames);
  cfg.feature_dims = h.value("feature_dims", cfg.feature_dims);
  cfg.conv1_filters = h.value("conv1_filters", cfg.conv1_filters);
  cfg.conv1_kernel = h.value("conv1_kernel", cfg.conv1_kernel);
  cfg.conv2_filters = h.value("conv2_filters", cfg.conv2_filters);
  cfg.conv2_kernel = h.value("conv2_kernel", cfg.conv2_kernel);
  cfg.pool1 = h.value("pool1", cfg.pool1);
  cfg.pool2 = h.value("pool2", cfg.pool2);
  cfg.dense1 = h.value("dense1", cfg.dense1);
  cfg.dense2 = h.value("dense2", cfg.dense2);
  cfg.drop1 = h.value("drop1", cfg.drop1);
  cfg.drop2 = h.value("drop2", cfg.drop2);
  cfg.classes = h.value("classes", cfg.classes);
  return cfg;
}

}  // namespace voxid::seg
