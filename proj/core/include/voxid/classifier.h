// voxid/classifier.h

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

#ifndef VOXID_CLASSIFIER_H_
#define VOXID_CLASSIFIER_H_

#include <string>
#include <utility>
#include <vector>

#include "voxid/audio.h"
#include "voxid/features.h"
#include "voxid/manifest.h"
#include "voxid/params.h"
#include "voxid/rng.h"
#include "voxid/segmenter.h"
#include "voxid/separator.h"
#include "voxid/tape.h"

namespace voxid::cls {

// Singer model: stacked BiLSTM over 39-dim MFCC trajectories, mean-pooled
// into a softmax over the label map.
struct ClassifierConfig {
  int feature_dims = 39;
  int layers = 3;
  int hidden = 25;  // per direction
  int tbptt_len = 20;
  int num_singers = 0;
};

// Singer names in class-index order.  The ordering is part of the model
// and is persisted in the bundle's meta.json.
struct LabelMap {
  std::vector<std::string> names;

  int Size() const { return static_cast<int>(names.size()); }
  int IndexOf(const std::string& name) const;
};

// Sorted unique singer names from a classification manifest.
LabelMap LabelMapFromItems(const std::vector<ClassificationItem>& items);

struct ClsTrainOptions {
  int epochs = 8;
  int steps_per_epoch = 25;  // one step = one class-stratified chunk batch
  int batch = 64;
  uint64_t seed = 42;
  double learning_rate = 0.001;
};

struct Prediction {
  int singer = -1;
  std::vector<double> distribution;  // mean of the snippet distributions
  std::vector<std::vector<double>> snippet_distributions;
};

// Non-owning view of the upstream models predict_song runs through.
struct FrontEnd {
  nn::ParameterSet* seg_params = nullptr;
  seg::SegmenterConfig seg_cfg;
  seg::TransitionModel transitions;
  nn::ParameterSet* sep_params = nullptr;
  sep::SeparatorConfig sep_cfg;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

struct Fold {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

void InitClassifierParams(nn::ParameterSet& params,
                          const ClassifierConfig& cfg, Rng& rng);

// x time-major [T*batch, feature_dims] -> logits [batch, num_singers].
nn::Var ClassnetLogits(nn::Tape& tape, nn::ParameterSet& params,
                       const ClassifierConfig& cfg, nn::Var x, int frames,
                       int batch);

// Whole-sequence distribution over singers, eval mode.
std::vector<double> ClassnetForward(nn::ParameterSet& params,
                                    const ClassifierConfig& cfg,
                                    const signal::FeatureMatrix& f);

// 13 MFCCs -> 39 dims with deltas, straight off a magnitude matrix on the
// shared STFT grid.
signal::FeatureMatrix FeaturesFromSpectrogram(
    const std::vector<std::vector<double>>& vocal_mag,
    const signal::StftConfig& stft_cfg);

// Initializes params (must be empty) and trains on tbptt_len-frame chunks
// (hidden state starts at zero for every chunk) with class-stratified
// batches.  Sequences shorter than tbptt_len are skipped.
nn::TrainTrace TrainClassifier(
    const std::vector<std::pair<signal::FeatureMatrix, int>>& data,
    const ClassifierConfig& cfg, const ClsTrainOptions& opt,
    nn::ParameterSet& params);

// Vocal-segment snippet features for one song: segment, cut, and either
// separate (use_separator) or take the mixture spectrogram directly.
// Errors with the no-vocal-content code when the timeline has no vocal
// intervals.
std::vector<signal::FeatureMatrix> SnippetFeatures(
    const signal::AudioBuffer& song, FrontEnd& fe, bool use_separator);

// Full pipeline on one song.  The distribution is the arithmetic mean over
// snippet distributions; ties resolve to the lowest class index.
Prediction PredictSong(const signal::AudioBuffer& song, FrontEnd& fe,
                       nn::ParameterSet& cls_params,
                       const ClassifierConfig& cls_cfg, bool use_separator);

// Seeded per-class round-robin split; every class needs at least k items.
std::vector<Fold> StratifiedKfold(const std::vector<int>& labels, int k,
                                  uint64_t seed,
                                  const std::vector<std::string>& names);

// Per-class precision/recall/F1 with undefined ratios reported as zero;
// macro values are unweighted class means.
PrfReport PrfMetrics(const std::vector<int>& predictions,
                     const std::vector<int>& truths, int num_classes);

void SaveClassifierBundle(const std::string& dir, const ClassifierConfig& cfg,
                          const LabelMap& labels,
                          const nn::ParameterSet& params);
ClassifierConfig LoadClassifierBundle(const std::string& dir,
                                      nn::ParameterSet& params,
                                      LabelMap& labels);

// Cross-validated singer identification with both feature pipelines
// (separated vocals vs raw mixture), reported at song and snippet level.
struct CvOptions {
  int folds = 5;
  uint64_t seed = 42;
  ClsTrainOptions train;
};

struct CvVariantResult {
  PrfReport song_level;
  PrfReport snippet_level;
  std::vector<PrfReport> per_fold_song;
};

struct CvResult {
  LabelMap labels;
  CvVariantResult separated;
  CvVariantResult raw;
};

CvResult EvalClassifierCv(const std::vector<ClassificationItem>& items,
                          FrontEnd& fe, const CvOptions& opt);

}  // namespace voxid::cls

#endif  // VOXID_CLASSIFIER_H_
