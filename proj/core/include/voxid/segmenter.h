// voxid/segmenter.h

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

#ifndef VOXID_SEGMENTER_H_
#define VOXID_SEGMENTER_H_

#include <string>
#include <vector>

#include "voxid/audio.h"
#include "voxid/features.h"
#include "voxid/manifest.h"
#include "voxid/params.h"
#include "voxid/rng.h"
#include "voxid/tape.h"
#include "voxid/timeline.h"

namespace voxid::seg {

// Frame classifier over 500 ms feature windows: two conv/pool blocks, two
// dropout-regularized dense layers, softmax over {non_vocal, vocal}.
struct SegmenterConfig {
  int window_frames = 50;
  int feature_dims = 20;  // 13 MFCC + 7 log-mel summary bands
  int conv1_filters = 128;
  int conv1_kernel = 10;
  int conv2_filters = 32;
  int conv2_kernel = 5;
  int pool1 = 5;  // 5x5
  int pool2 = 2;  // 2x2
  int dense1 = 128;
  int dense2 = 128;
  double drop1 = 0.75;
  double drop2 = 0.5;
  int classes = 2;
};

// Per-frame vocal posteriors on the 10 ms grid.
struct FrameProbs {
  std::vector<double> p_vocal;
  double hop_seconds = 0.010;
};

// Two-state HMM used by Viterbi smoothing.  All probabilities open (0,1).
struct TransitionModel {
  double p_stay_vocal = 0.99;
  double p_stay_nonvocal = 0.99;
  double prior_vocal = 0.5;
};

struct SegTrainOptions {
  int epochs = 5;
  int steps_per_epoch = 30;  // one step = one class-balanced batch
  int batch = 64;
  uint64_t seed = 42;
  double learning_rate = 0.001;
};

// Frame-level precision on the 10 ms grid, Table-style: one column per
// class plus their arithmetic mean.
struct SegEvalResult {
  double precision_vocal = 0.0;
  double precision_nonvocal = 0.0;
  double mean_precision = 0.0;
  double frame_accuracy = 0.0;
};

// Registers conv1/conv2/fc1/fc2/out weights and biases.
void InitSegmenterParams(nn::ParameterSet& params, const SegmenterConfig& cfg,
                         Rng& rng);

// windows [B, 1, window_frames, feature_dims] -> logits [B, classes].
// rng drives dropout and is only consumed in training mode.
nn::Var SegnetLogits(nn::Tape& tape, nn::ParameterSet& params,
                     const SegmenterConfig& cfg, nn::Var windows, Rng& rng);

// Single window [window_frames][feature_dims] -> p(vocal), eval mode.
double SegnetForward(nn::ParameterSet& params, const SegmenterConfig& cfg,
                     const std::vector<std::vector<double>>& window);

// 13 MFCCs plus 7 log-mel bands per 10 ms frame; resamples internally to
// the pipeline rate.
signal::FeatureMatrix SegmenterFeatures(const signal::AudioBuffer& song);

// Scores a centered window (replicate-padded at song edges) for every
// frame.  Requires at least 500 ms of audio.
FrameProbs FrameProbabilities(const signal::AudioBuffer& song,
                              nn::ParameterSet& params,
                              const SegmenterConfig& cfg);

// Exact MAP label sequence of the two-state HMM over the frame posteriors;
// ties resolve to non_vocal.
std::vector<SegmentLabel> ViterbiSmooth(const FrameProbs& probs,
                                        const TransitionModel& tm);

// Run-length encodes labels into a timeline; runs shorter than
// min_segment_s are absorbed into the longer neighbor.
SegmentTimeline TimelineFromLabels(const std::vector<SegmentLabel>& labels,
                                   double hop_seconds,
                                   double min_segment_s = 0.2);

// Initializes params (must be empty) and trains on class-balanced window
// batches with softmax cross-entropy.
nn::TrainTrace TrainSegmenter(const std::vector<SegmentationItem>& data,
                              const SegmenterConfig& cfg,
                              const SegTrainOptions& opt,
                              nn::ParameterSet& params);

// Frame-level comparison of two timelines covering the same duration
// (mismatch beyond one frame is an error).
SegEvalResult EvalSegmentation(const SegmentTimeline& pred,
                               const SegmentTimeline& truth);

// Bundle round trip.  Load validates the architecture id and rebuilds the
// config from the stored hyperparameters.
void SaveSegmenterBundle(const std::string& dir, const SegmenterConfig& cfg,
                         const nn::ParameterSet& params);
SegmenterConfig LoadSegmenterBundle(const std::string& dir,
                                    nn::ParameterSet& params);

}  // namespace voxid::seg

#endif  // VOXID_SEGMENTER_H_
