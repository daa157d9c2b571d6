// voxid/classifier.cc

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

#include "voxid/classifier.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "voxid/bundle.h"
#include "voxid/error.h"
#include "voxid/rnn.h"
#include "voxid/stft.h"

namespace voxid::cls {

namespace {

using nn::Tensor;
using nn::Var;

constexpr const char* kArchitecture = "classnet-v1";

std::string LayerPrefix(int layer, bool forward) {
  return "l" + std::to_string(layer + 1) + (forward ? ".fw" : ".bw");
}

int ArgmaxLowest(const std::vector<double>& v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

std::vector<double> MeanDistribution(
    const std::vector<std::vector<double>>& dists) {
  std::vector<double> mean(dists[0].size(), 0.0);
  for (const std::vector<double>& d : dists) {
    for (size_t i = 0; i < mean.size(); ++i) mean[i] += d[i];
  }
  for (double& m : mean) m /= static_cast<double>(dists.size());
  return mean;
}

// Vocal intervals of the smoothed timeline, concatenated into one buffer.
signal::AudioBuffer ExtractVocalAudio(const signal::AudioBuffer& audio,
                                      FrontEnd& fe) {
  seg::FrameProbs probs =
      seg::FrameProbabilities(audio, *fe.seg_params, fe.seg_cfg);
  std::vector<SegmentLabel> labels =
      seg::ViterbiSmooth(probs, fe.transitions);
  SegmentTimeline timeline =
      seg::TimelineFromLabels(labels, probs.hop_seconds);
  signal::AudioBuffer vocal;
  vocal.sample_rate = audio.sample_rate;
  for (const Segment& s : timeline.segments) {
    if (s.label != SegmentLabel::kVocal) continue;
    const int64_t begin = std::llround(s.start_s * audio.sample_rate);
    const int64_t end =
        std::min<int64_t>(std::llround(s.end_s * audio.sample_rate),
                          audio.NumSamples());
    for (int64_t i = begin; i < end; ++i) {
      vocal.samples.push_back(audio.samples[i]);
    }
  }
  if (vocal.samples.empty()) {
    Throw(ErrorCode::kNoVocalContent, "no vocal content detected");
  }
  return vocal;
}

// Snippet-length blocks of a spectrogram.  A trailing remainder survives
// when it covers at least half a snippet or is the only block.
std::vector<std::vector<std::vector<double>>> SplitBlocks(
    const std::vector<std::vector<double>>& mag, int frames_per) {
  std::vector<std::vector<std::vector<double>>> blocks;
  const int total = static_cast<int>(mag.size());
  for (int begin = 0; begin < total; begin += frames_per) {
    const int len = std::min(frames_per, total - begin);
    if (len < frames_per / 2 && !blocks.empty()) break;
    blocks.emplace_back(mag.begin() + begin, mag.begin() + begin + len);
  }
  return blocks;
}

std::vector<signal::FeatureMatrix> FeaturesFromVocal(
    const signal::AudioBuffer& vocal, FrontEnd& fe, bool use_separator) {
  const signal::StftConfig stft_cfg = signal::DefaultStftConfig();
  std::vector<std::vector<double>> mag;
  if (use_separator) {
    mag = sep::Separate(vocal, *fe.sep_params, fe.sep_cfg)
              .vocal_spectrogram.magnitude;
  } else {
    mag = signal::Stft(vocal, stft_cfg).magnitude;
  }
  const int frames_per = static_cast<int>(
      std::llround(fe.sep_cfg.snippet_seconds * stft_cfg.sample_rate) /
      stft_cfg.hop);
  std::vector<signal::FeatureMatrix> out;
  for (const auto& block : SplitBlocks(mag, frames_per)) {
    out.push_back(FeaturesFromSpectrogram(block, stft_cfg));
  }
  return out;
}

}  // namespace

int LabelMap::IndexOf(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

LabelMap LabelMapFromItems(const std::vector<ClassificationItem>& items) {
  std::set<std::string> unique;
  for (const ClassificationItem& item : items) unique.insert(item.singer);
  LabelMap map;
  map.names.assign(unique.begin(), unique.end());
  return map;
}

void InitClassifierParams(nn::ParameterSet& params,
                          const ClassifierConfig& cfg, Rng& rng) {
  if (cfg.num_singers < 2) {
    Throw(ErrorCode::kInvalidArgument,
          "classifier needs at least 2 singers, got " +
              std::to_string(cfg.num_singers));
  }
  int in = cfg.feature_dims;
  for (int layer = 0; layer < cfg.layers; ++layer) {
    nn::CreateLstmParams(params, LayerPrefix(layer, true), in, cfg.hidden,
                         rng);
    nn::CreateLstmParams(params, LayerPrefix(layer, false), in, cfg.hidden,
                         rng);
    in = 2 * cfg.hidden;
  }
  params.Create("out.w", Tensor::GlorotInit({in, cfg.num_singers}, in,
                                            cfg.num_singers, rng));
  params.Create("out.b", Tensor::Zeros({cfg.num_singers}));
}

nn::Var ClassnetLogits(nn::Tape& tape, nn::ParameterSet& params,
                       const ClassifierConfig& cfg, nn::Var x, int frames,
                       int batch) {
  const Tensor& v = tape.value(x);
  if (v.ndim() != 2 || v.dim(0) != frames * batch ||
      v.dim(1) != cfg.feature_dims) {
    Throw(ErrorCode::kShapeMismatch,
          "classifier expects [" + std::to_string(frames * batch) + ", " +
              std::to_string(cfg.feature_dims) + "], got " +
              nn::ShapeToString(v.shape()));
  }
  Var h = x;
  for (int layer = 0; layer < cfg.layers; ++layer) {
    h = nn::BilstmLayer(tape, h, frames, batch, cfg.hidden,
                        nn::BindLstm(tape, params, LayerPrefix(layer, true)),
                        nn::BindLstm(tape, params,
                                     LayerPrefix(layer, false)));
  }
  std::vector<Var> steps;
  steps.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    steps.push_back(tape.slice_rows(h, t * batch, (t + 1) * batch));
  }
  Var pooled = tape.mean_of(steps);
  return tape.dense(pooled, tape.param(params.Get("out.w")),
                    tape.param(params.Get("out.b")));
}

std::vector<double> ClassnetForward(nn::ParameterSet& params,
                                    const ClassifierConfig& cfg,
                                    const signal::FeatureMatrix& f) {
  if (f.NumFrames() < 1) {
    Throw(ErrorCode::kInvalidArgument, "empty feature sequence");
  }
  if (f.Dims() != cfg.feature_dims) {
    Throw(ErrorCode::kShapeMismatch,
          "feature dim " + std::to_string(f.Dims()) + " does not match " +
              std::to_string(cfg.feature_dims));
  }
  Tensor x({f.NumFrames(), cfg.feature_dims});
  for (int t = 0; t < f.NumFrames(); ++t) {
    std::copy(f.data[t].begin(), f.data[t].end(),
              x.data() + int64_t{t} * cfg.feature_dims);
  }
  nn::Tape tape(false);
  Var logits = ClassnetLogits(tape, params, cfg,
                              tape.constant(std::move(x)), f.NumFrames(),
                              /*batch=*/1);
  Tensor probs = nn::SoftmaxRows(tape.value(logits));
  return std::vector<double>(probs.data(),
                             probs.data() + cfg.num_singers);
}

signal::FeatureMatrix FeaturesFromSpectrogram(
    const std::vector<std::vector<double>>& vocal_mag,
    const signal::StftConfig& stft_cfg) {
  return signal::AddDeltas(signal::MfccFromMagnitude(vocal_mag, stft_cfg));
}

nn::TrainTrace TrainClassifier(
    const std::vector<std::pair<signal::FeatureMatrix, int>>& data,
    const ClassifierConfig& cfg, const ClsTrainOptions& opt,
    nn::ParameterSet& params) {
  if (data.empty()) {
    Throw(ErrorCode::kInvalidArgument, "classifier training data is empty");
  }
  if (params.size() != 0) {
    Throw(ErrorCode::kInvalidArgument,
          "parameter set must be empty before training");
  }
  // (sequence, start frame) chunk pools per class.
  std::vector<std::vector<std::pair<int, int>>> pools(cfg.num_singers);
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& [f, label] = data[i];
    if (label < 0 || label >= cfg.num_singers) {
      Throw(ErrorCode::kInvalidArgument,
            "label " + std::to_string(label) + " out of range");
    }
    if (f.Dims() != cfg.feature_dims) {
      Throw(ErrorCode::kShapeMismatch,
            "sequence " + std::to_string(i) + " has dim " +
                std::to_string(f.Dims()) + ", expected " +
                std::to_string(cfg.feature_dims));
    }
    for (int start = 0; start + cfg.tbptt_len <= f.NumFrames();
         start += cfg.tbptt_len) {
      pools[label].push_back({static_cast<int>(i), start});
    }
  }
  std::vector<int> present;
  for (int c = 0; c < cfg.num_singers; ++c) {
    if (!pools[c].empty()) present.push_back(c);
  }
  if (present.size() < 2) {
    Throw(ErrorCode::kInvalidArgument,
          "training data contains fewer than two classes with usable "
          "sequences");
  }
  Rng root(opt.seed);
  Rng init_rng = root.Fork(1);
  Rng sample_rng = root.Fork(2);
  InitClassifierParams(params, cfg, init_rng);
  nn::AdamConfig adam;
  adam.learning_rate = opt.learning_rate;
  nn::TrainTrace trace;
  const int T = cfg.tbptt_len;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int step = 0; step < opt.steps_per_epoch; ++step) {
      Tensor x({T * opt.batch, cfg.feature_dims});
      std::vector<int> labels(opt.batch);
      for (int b = 0; b < opt.batch; ++b) {
        const int c = present[b % present.size()];
        const auto [seq, start] =
            pools[c][sample_rng.NextBelow(pools[c].size())];
        const signal::FeatureMatrix& f = data[seq].first;
        for (int t = 0; t < T; ++t) {
          std::copy(f.data[start + t].begin(), f.data[start + t].end(),
                    x.data() +
                        (int64_t{t} * opt.batch + b) * cfg.feature_dims);
        }
        labels[b] = c;
      }
      nn::Tape tape(true);
      Var logits = ClassnetLogits(tape, params, cfg,
                                  tape.constant(std::move(x)), T, opt.batch);
      nn::Tape::XentResult res = tape.softmax_xent(logits, labels);
      loss_sum += tape.value(res.loss)[0];
      tape.backward(res.loss);
      nn::AdamStep(params, adam);
    }
    trace.epoch_loss.push_back(loss_sum / opt.steps_per_epoch);
  }
  return trace;
}

std::vector<signal::FeatureMatrix> SnippetFeatures(
    const signal::AudioBuffer& song, FrontEnd& fe, bool use_separator) {
  signal::AudioBuffer audio =
      signal::Resample(song, signal::kPipelineSampleRate);
  return FeaturesFromVocal(ExtractVocalAudio(audio, fe), fe, use_separator);
}

Prediction PredictSong(const signal::AudioBuffer& song, FrontEnd& fe,
                       nn::ParameterSet& cls_params,
                       const ClassifierConfig& cls_cfg, bool use_separator) {
  if (song.DurationSeconds() < 1.0) {
    Throw(ErrorCode::kInvalidArgument,
          "identification needs at least 1 s of audio, got " +
              std::to_string(song.DurationSeconds()) + " s");
  }
  Prediction pred;
  for (const signal::FeatureMatrix& f :
       SnippetFeatures(song, fe, use_separator)) {
    pred.snippet_distributions.push_back(
        ClassnetForward(cls_params, cls_cfg, f));
  }
  pred.distribution = MeanDistribution(pred.snippet_distributions);
  pred.singer = ArgmaxLowest(pred.distribution);
  return pred;
}

std::vector<Fold> StratifiedKfold(const std::vector<int>& labels, int k,
                                  uint64_t seed,
                                  const std::vector<std::string>& names) {
  if (labels.empty()) {
    Throw(ErrorCode::kInvalidArgument, "no items to split");
  }
  if (k < 2) {
    Throw(ErrorCode::kInvalidArgument, "need at least 2 folds");
  }
  int num_classes = 0;
  for (const int label : labels) {
    if (label < 0) {
      Throw(ErrorCode::kInvalidArgument, "negative class label");
    }
    num_classes = std::max(num_classes, label + 1);
  }
  std::vector<std::vector<int>> by_class(num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i]].push_back(static_cast<int>(i));
  }
  Rng rng(seed);
  std::vector<int> fold_of(labels.size());
  for (int c = 0; c < num_classes; ++c) {
    std::vector<int>& items = by_class[c];
    if (static_cast<int>(items.size()) < k) {
      const std::string name = c < static_cast<int>(names.size())
                                   ? names[c]
                                   : std::to_string(c);
      Throw(ErrorCode::kInvalidArgument,
            "class " + name + " has " + std::to_string(items.size()) +
                " songs; need at least " + std::to_string(k));
    }
    for (size_t i = items.size() - 1; i > 0; --i) {
      std::swap(items[i], items[rng.NextBelow(i + 1)]);
    }
    for (size_t j = 0; j < items.size(); ++j) {
      fold_of[items[j]] = static_cast<int>(j % k);
    }
  }
  std::vector<Fold> folds(k);
  for (size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      if (fold_of[i] == f) {
        folds[f].test_indices.push_back(static_cast<int>(i));
      } else {
        folds[f].train_indices.push_back(static_cast<int>(i));
      }
    }
  }
  return folds;
}

PrfReport PrfMetrics(const std::vector<int>& predictions,
                     const std::vector<int>& truths, int num_classes) {
  if (predictions.size() != truths.size()) {
    Throw(ErrorCode::kShapeMismatch,
          "prediction and truth counts differ: " +
              std::to_string(predictions.size()) + " vs " +
              std::to_string(truths.size()));
  }
  if (predictions.empty()) {
    Throw(ErrorCode::kInvalidArgument, "no predictions to score");
  }
  std::vector<int64_t> tp(num_classes, 0), fp(num_classes, 0),
      fn(num_classes, 0);
  for (size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i], t = truths[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes) {
      Throw(ErrorCode::kInvalidArgument,
            "label out of range at position " + std::to_string(i));
    }
    if (p == t) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  PrfReport report;
  report.per_class.resize(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    ClassMetrics& m = report.per_class[c];
    m.precision = tp[c] + fp[c] > 0
                      ? static_cast<double>(tp[c]) / (tp[c] + fp[c])
                      : 0.0;
    m.recall = tp[c] + fn[c] > 0
                   ? static_cast<double>(tp[c]) / (tp[c] + fn[c])
                   : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
    report.macro_f1 += m.f1;
  }
  report.macro_precision /= num_classes;
  report.macro_recall /= num_classes;
  report.macro_f1 /= num_classes;
  return report;
}

void SaveClassifierBundle(const std::string& dir, const ClassifierConfig& cfg,
                          const LabelMap& labels,
                          const nn::ParameterSet& params) {
  nn::BundleInfo info;
  info.architecture = kArchitecture;
  info.hyperparameters = {
      {"feature_dims", cfg.feature_dims},
      {"layers", cfg.layers},
      {"hidden", cfg.hidden},
      {"tbptt_len", cfg.tbptt_len},
      {"num_singers", cfg.num_singers},
  };
  info.meta = {{"singers", labels.names}};
  nn::SaveBundle(dir, info, params);
}

ClassifierConfig LoadClassifierBundle(const std::string& dir,
                                      nn::ParameterSet& params,
                                      LabelMap& labels) {
  nn::BundleInfo info = nn::LoadBundle(dir, params);
  if (info.architecture != kArchitecture) {
    Throw(ErrorCode::kBadBundle,
          "expected architecture " + std::string(kArchitecture) + ", found " +
              info.architecture);
  }
  ClassifierConfig cfg;
  const nlohmann::json& h = info.hyperparameters;
  cfg.feature_dims = h.value("feature_dims", cfg.feature_dims);
  cfg.layers = h.value("layers", cfg.layers);
  cfg.hidden = h.value("hidden", cfg.hidden);
  cfg.tbptt_len = h.value("tbptt_len", cfg.tbptt_len);
  cfg.num_singers = h.value("num_singers", cfg.num_singers);
  if (!info.meta.is_object() || !info.meta.contains("singers") ||
      !info.meta["singers"].is_array()) {
    Throw(ErrorCode::kBadBundle, "bundle meta lacks singer names");
  }
  labels.names.clear();
  for (const auto& name : info.meta["singers"]) {
    labels.names.push_back(name.get<std::string>());
  }
  if (labels.Size() != cfg.num_singers) {
    Throw(ErrorCode::kBadBundle,
          "singer list size " + std::to_string(labels.Size()) +
              " does not match num_singers " +
              std::to_string(cfg.num_singers));
  }
  return cfg;
}

CvResult EvalClassifierCv(const std::vector<ClassificationItem>& items,
                          FrontEnd& fe, const CvOptions& opt) {
  if (items.empty()) {
    Throw(ErrorCode::kInvalidArgument, "classification manifest is empty");
  }
  CvResult result;
  result.labels = LabelMapFromItems(items);
  const int num_classes = result.labels.Size();
  std::vector<int> truth(items.size());
  std::vector<std::vector<signal::FeatureMatrix>> sep_feats(items.size());
  std::vector<std::vector<signal::FeatureMatrix>> raw_feats(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    truth[i] = result.labels.IndexOf(items[i].singer);
    signal::AudioBuffer audio = signal::Resample(
        signal::ReadWav(items[i].path), signal::kPipelineSampleRate);
    signal::AudioBuffer vocal = ExtractVocalAudio(audio, fe);
    sep_feats[i] = FeaturesFromVocal(vocal, fe, /*use_separator=*/true);
    raw_feats[i] = FeaturesFromVocal(vocal, fe, /*use_separator=*/false);
  }
  std::vector<Fold> folds =
      StratifiedKfold(truth, opt.folds, opt.seed, result.labels.names);
  Rng seed_rng(opt.seed);
  for (int variant = 0; variant < 2; ++variant) {
    const auto& feats = variant == 0 ? sep_feats : raw_feats;
    CvVariantResult& out = variant == 0 ? result.separated : result.raw;
    std::vector<int> song_pred(items.size(), -1);
    std::vector<int> snippet_pred, snippet_truth;
    for (size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::pair<signal::FeatureMatrix, int>> train_data;
      for (const int i : folds[f].train_indices) {
        for (const signal::FeatureMatrix& m : feats[i]) {
          train_data.push_back({m, truth[i]});
        }
      }
      ClassifierConfig cfg;
      cfg.num_singers = num_classes;
      ClsTrainOptions fold_opt = opt.train;
      fold_opt.seed = seed_rng.NextU64();
      nn::ParameterSet params;
      TrainClassifier(train_data, cfg, fold_opt, params);
      std::vector<int> fold_pred, fold_truth;
      for (const int i : folds[f].test_indices) {
        std::vector<std::vector<double>> dists;
        for (const signal::FeatureMatrix& m : feats[i]) {
          dists.push_back(ClassnetForward(params, cfg, m));
          snippet_pred.push_back(ArgmaxLowest(dists.back()));
          snippet_truth.push_back(truth[i]);
        }
        song_pred[i] = ArgmaxLowest(MeanDistribution(dists));
        fold_pred.push_back(song_pred[i]);
        fold_truth.push_back(truth[i]);
      }
      out.per_fold_song.push_back(
          PrfMetrics(fold_pred, fold_truth, num_classes));
    }
    out.song_level = PrfMetrics(song_pred, truth, num_classes);
    out.snippet_level = PrfMetrics(snippet_pred, snippet_truth, num_classes);
  }
  return result;
}

}  // namespace voxid::cls
