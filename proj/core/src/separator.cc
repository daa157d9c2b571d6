// voxid/separator.cc

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

#include "voxid/separator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "voxid/bundle.h"
#include "voxid/error.h"
#include "voxid/rnn.h"

namespace voxid::sep {

namespace {

using nn::Tensor;
using nn::Var;

constexpr const char* kArchitecture = "sepnet-v1";

// Recurrent skip layer at one scale: [B,C,T] -> [B,C,T], hidden size = C.
Var SkipLayer(nn::Tape& tape, nn::ParameterSet& params,
              const SeparatorConfig& cfg, const std::string& prefix, Var x) {
  const Tensor& v = tape.value(x);
  const int batch = v.dim(0), channels = v.dim(1), frames = v.dim(2);
  Var seq = tape.to_time_major(x);
  Var out;
  if (cfg.skip_kind == SkipKind::kGru) {
    out = nn::GruSeq(tape, seq, frames, batch, channels,
                     nn::BindGru(tape, params, prefix));
  } else {
    out = nn::LstmSeq(tape, seq, frames, batch, channels,
                      nn::BindLstm(tape, params, prefix), /*reverse=*/false);
  }
  return tape.from_time_major(out, batch);
}

int SnippetSamples(const SeparatorConfig& cfg) {
  return static_cast<int>(
      std::llround(cfg.snippet_seconds * signal::kPipelineSampleRate));
}

// Full snippets plus a zero-padded tail, so reconstruction always covers
// the whole input.
std::vector<signal::AudioBuffer> ChopPadded(const signal::AudioBuffer& audio,
                                            int snippet_len) {
  std::vector<signal::AudioBuffer> out;
  const int64_t n = audio.NumSamples();
  for (int64_t begin = 0; begin < n; begin += snippet_len) {
    signal::AudioBuffer s;
    s.sample_rate = audio.sample_rate;
    const int64_t end = std::min(n, begin + snippet_len);
    s.samples.assign(audio.samples.begin() + begin,
                     audio.samples.begin() + end);
    s.samples.resize(snippet_len, 0.0);
    out.push_back(std::move(s));
  }
  if (out.empty()) {
    signal::AudioBuffer s;
    s.sample_rate = audio.sample_rate;
    s.samples.assign(snippet_len, 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

// log1p spectrogram [frames][bins] of one snippet into tensor slot b of
// x [B, bins, T] (bins become channels).
void FillSnippetChannels(const std::vector<std::vector<double>>& log_mag,
                         int b, Tensor& x) {
  const int bins = x.dim(1), frames = x.dim(2);
  double* base = x.data() + int64_t{b} * bins * frames;
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < bins; ++c) {
      base[int64_t{c} * frames + t] = log_mag[t][c];
    }
  }
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// Loads one side of a pair at the pipeline rate.
signal::AudioBuffer LoadPipelineAudio(const std::string& path) {
  return signal::Resample(signal::ReadWav(path), signal::kPipelineSampleRate);
}

}  // namespace

const char* SkipKindName(SkipKind kind) {
  return kind == SkipKind::kGru ? "gru" : "lstm";
}

SkipKind SkipKindFromName(const std::string& name) {
  if (name == "gru") return SkipKind::kGru;
  if (name == "lstm") return SkipKind::kLstm;
  Throw(ErrorCode::kInvalidArgument, "unknown skip kind: " + name);
}

void InitSeparatorParams(nn::ParameterSet& params, const SeparatorConfig& cfg,
                         Rng& rng) {
  const int k = cfg.kernel;
  auto conv = [&](const std::string& name, int in, int out) {
    params.Create(name + ".k",
                  Tensor::GlorotInit({out, in, k}, in * k, out * k, rng));
    params.Create(name + ".b", Tensor::Zeros({out}));
  };
  auto deconv = [&](const std::string& name, int in, int out) {
    params.Create(name + ".k",
                  Tensor::GlorotInit({in, out, k}, in * k, out * k, rng));
    params.Create(name + ".b", Tensor::Zeros({out}));
  };
  auto skip = [&](const std::string& name, int channels) {
    if (cfg.skip_kind == SkipKind::kGru) {
      nn::CreateGruParams(params, name, channels, channels, rng);
    } else {
      nn::CreateLstmParams(params, name, channels, channels, rng);
    }
  };
  conv("enc1", cfg.bins, cfg.enc1);
  conv("enc2", cfg.enc1, cfg.enc2);
  conv("enc3", cfg.enc2, cfg.enc3);
  skip("skip1", cfg.enc1);
  skip("skip2", cfg.enc2);
  skip("skip3", cfg.enc3);
  deconv("dec1", cfg.enc3, cfg.enc2);
  deconv("dec2", cfg.enc2, cfg.enc1);
  deconv("dec3", cfg.enc1, cfg.bins);
}

nn::Var SepnetForward(nn::Tape& tape, nn::ParameterSet& params,
                      const SeparatorConfig& cfg, nn::Var x) {
  const Tensor& v = tape.value(x);
  if (v.ndim() != 3 || v.dim(1) != cfg.bins) {
    Throw(ErrorCode::kShapeMismatch,
          "separator expects [batch, " + std::to_string(cfg.bins) +
              ", frames], got " + nn::ShapeToString(v.shape()));
  }
  const int frames = v.dim(2);
  if (frames < 8 || frames % 8 != 0) {
    Throw(ErrorCode::kShapeMismatch,
          "frame count must be a positive multiple of 8, got " +
              std::to_string(frames));
  }
  auto conv = [&](const std::string& name, Var in) {
    return tape.relu(tape.conv1d(in, tape.param(params.Get(name + ".k")),
                                 tape.param(params.Get(name + ".b")),
                                 cfg.stride));
  };
  Var e1 = conv("enc1", x);
  Var e2 = conv("enc2", e1);
  Var e3 = conv("enc3", e2);
  Var s1 = SkipLayer(tape, params, cfg, "skip1", e1);
  Var s2 = SkipLayer(tape, params, cfg, "skip2", e2);
  Var s3 = SkipLayer(tape, params, cfg, "skip3", e3);
  auto deconv = [&](const std::string& name, Var in) {
    return tape.conv1d_transpose(in, tape.param(params.Get(name + ".k")),
                                 tape.param(params.Get(name + ".b")),
                                 cfg.stride);
  };
  Var d1 = tape.relu(tape.add(deconv("dec1", s3), s2));
  Var d2 = tape.relu(tape.add(deconv("dec2", d1), s1));
  return tape.relu(deconv("dec3", d2));
}

std::vector<std::vector<double>> SepnetApply(
    nn::ParameterSet& params, const SeparatorConfig& cfg,
    const std::vector<std::vector<double>>& log_mag) {
  const int frames = static_cast<int>(log_mag.size());
  if (frames == 0) {
    Throw(ErrorCode::kShapeMismatch, "empty spectrogram");
  }
  Tensor x({1, cfg.bins, frames});
  for (int t = 0; t < frames; ++t) {
    if (static_cast<int>(log_mag[t].size()) != cfg.bins) {
      Throw(ErrorCode::kShapeMismatch,
            "frame " + std::to_string(t) + " has " +
                std::to_string(log_mag[t].size()) + " bins, expected " +
                std::to_string(cfg.bins));
    }
    for (int c = 0; c < cfg.bins; ++c) {
      x.data()[int64_t{c} * frames + t] = log_mag[t][c];
    }
  }
  nn::Tape tape(false);
  Var out = SepnetForward(tape, params, cfg, tape.constant(std::move(x)));
  const Tensor& y = tape.value(out);
  std::vector<std::vector<double>> result(
      frames, std::vector<double>(cfg.bins));
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < cfg.bins; ++c) {
      result[t][c] = y.data()[int64_t{c} * frames + t];
    }
  }
  return result;
}

SeparationResult Separate(const signal::AudioBuffer& mixture,
                          nn::ParameterSet& params,
                          const SeparatorConfig& cfg) {
  if (mixture.NumSamples() == 0) {
    Throw(ErrorCode::kEmptyAudio, "empty mixture");
  }
  signal::AudioBuffer audio =
      signal::Resample(mixture, signal::kPipelineSampleRate);
  const signal::StftConfig stft_cfg = signal::DefaultStftConfig();
  const int snippet_len = SnippetSamples(cfg);
  std::vector<signal::AudioBuffer> snippets = ChopPadded(audio, snippet_len);

  SeparationResult out;
  out.vocal_audio.sample_rate = audio.sample_rate;
  out.vocal_spectrogram.config = stft_cfg;
  out.vocal_spectrogram.source_samples = audio.NumSamples();
  for (const signal::AudioBuffer& snippet : snippets) {
    signal::ComplexSpectrogram spec = signal::Stft(snippet, stft_cfg);
    std::vector<std::vector<double>> est_log =
        SepnetApply(params, cfg, signal::Log1pCompress(spec.magnitude));
    signal::ComplexSpectrogram est;
    est.magnitude = signal::Expm1Expand(est_log);
    est.phase = spec.phase;
    est.config = stft_cfg;
    est.source_samples = snippet.NumSamples();
    signal::AudioBuffer rec = signal::Istft(est);
    out.vocal_audio.samples.insert(out.vocal_audio.samples.end(),
                                   rec.samples.begin(), rec.samples.end());
    for (int t = 0; t < est.NumFrames(); ++t) {
      out.vocal_spectrogram.magnitude.push_back(std::move(est.magnitude[t]));
      out.vocal_spectrogram.phase.push_back(std::move(est.phase[t]));
    }
  }
  out.vocal_audio.samples.resize(audio.NumSamples());
  const int total_frames = static_cast<int>(
      (audio.NumSamples() + stft_cfg.hop - 1) / stft_cfg.hop);
  if (static_cast<int>(out.vocal_spectrogram.magnitude.size()) >
      total_frames) {
    out.vocal_spectrogram.magnitude.resize(total_frames);
    out.vocal_spectrogram.phase.resize(total_frames);
  }
  return out;
}

nn::TrainTrace TrainSeparator(const std::vector<PairItem>& pairs,
                              const SeparatorConfig& cfg,
                              const SepTrainOptions& opt,
                              nn::ParameterSet& params) {
  if (pairs.empty()) {
    Throw(ErrorCode::kInvalidArgument, "pair manifest is empty");
  }
  if (params.size() != 0) {
    Throw(ErrorCode::kInvalidArgument,
          "parameter set must be empty before training");
  }
  for (const PairItem& pair : pairs) {
    signal::AudioBuffer mix = LoadPipelineAudio(pair.mixture);
    signal::AudioBuffer voc = LoadPipelineAudio(pair.vocal);
    if (mix.NumSamples() != voc.NumSamples()) {
      Throw(ErrorCode::kInvalidArgument,
            "length mismatch in pair (" + pair.mixture + ", " + pair.vocal +
                "): " + std::to_string(mix.NumSamples()) + " vs " +
                std::to_string(voc.NumSamples()) + " samples");
    }
  }
  Rng root(opt.seed);
  Rng init_rng = root.Fork(1);
  Rng sample_rng = root.Fork(2);
  InitSeparatorParams(params, cfg, init_rng);
  nn::AdamConfig adam;
  adam.learning_rate = opt.learning_rate;
  const signal::StftConfig stft_cfg = signal::DefaultStftConfig();
  const int snippet_len = SnippetSamples(cfg);
  const int frames = snippet_len / stft_cfg.hop;
  nn::TrainTrace trace;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int step = 0; step < opt.steps_per_epoch; ++step) {
      Tensor x({opt.batch, cfg.bins, frames});
      Tensor target({opt.batch, cfg.bins, frames});
      for (int b = 0; b < opt.batch; ++b) {
        const PairItem& pair =
            pairs[sample_rng.NextBelow(pairs.size())];
        signal::AudioBuffer mix = LoadPipelineAudio(pair.mixture);
        signal::AudioBuffer voc = LoadPipelineAudio(pair.vocal);
        mix.samples.resize(snippet_len, 0.0);
        voc.samples.resize(snippet_len, 0.0);
        FillSnippetChannels(
            signal::Log1pCompress(signal::Stft(mix, stft_cfg).magnitude), b,
            x);
        FillSnippetChannels(
            signal::Log1pCompress(signal::Stft(voc, stft_cfg).magnitude), b,
            target);
      }
      nn::Tape tape(true);
      Var pred =
          SepnetForward(tape, params, cfg, tape.constant(std::move(x)));
      Var loss = tape.l1_loss(pred, tape.constant(std::move(target)));
      loss_sum += tape.value(loss)[0];
      tape.backward(loss);
      nn::AdamStep(params, adam);
    }
    trace.epoch_loss.push_back(loss_sum / opt.steps_per_epoch);
  }
  return trace;
}

double SiSdr(const signal::AudioBuffer& reference,
             const signal::AudioBuffer& estimate) {
  if (reference.NumSamples() != estimate.NumSamples()) {
    Throw(ErrorCode::kShapeMismatch,
          "signal lengths differ: " + std::to_string(reference.NumSamples()) +
              " vs " + std::to_string(estimate.NumSamples()));
  }
  if (reference.NumSamples() == 0) {
    Throw(ErrorCode::kEmptyAudio, "empty reference");
  }
  double dot = 0.0, ref_energy = 0.0;
  for (int64_t i = 0; i < reference.NumSamples(); ++i) {
    dot += estimate.samples[i] * reference.samples[i];
    ref_energy += reference.samples[i] * reference.samples[i];
  }
  if (ref_energy == 0.0) {
    Throw(ErrorCode::kInvalidArgument, "reference is identically zero");
  }
  const double alpha = dot / ref_energy;
  const double target_energy = alpha * alpha * ref_energy;
  double err_energy = 0.0;
  for (int64_t i = 0; i < reference.NumSamples(); ++i) {
    const double e = estimate.samples[i] - alpha * reference.samples[i];
    err_energy += e * e;
  }
  if (target_energy == 0.0) return -100.0;
  if (err_energy == 0.0) return 100.0;
  return std::clamp(10.0 * std::log10(target_energy / err_energy), -100.0,
                    100.0);
}

SepEvalResult EvalSeparation(const std::vector<PairItem>& pairs,
                             nn::ParameterSet& params,
                             const SeparatorConfig& cfg) {
  if (pairs.empty()) {
    Throw(ErrorCode::kInvalidArgument, "pair manifest is empty");
  }
  SepEvalResult out;
  std::vector<double> si, base, improvement;
  for (const PairItem& pair : pairs) {
    signal::AudioBuffer mix = LoadPipelineAudio(pair.mixture);
    signal::AudioBuffer voc = LoadPipelineAudio(pair.vocal);
    if (mix.NumSamples() != voc.NumSamples()) {
      Throw(ErrorCode::kInvalidArgument,
            "length mismatch in pair (" + pair.mixture + ", " + pair.vocal +
                ")");
    }
    signal::AudioBuffer est = Separate(mix, params, cfg).vocal_audio;
    SepEvalTrack track;
    track.id = pair.mixture;
    track.si_sdr = SiSdr(voc, est);
    track.baseline = SiSdr(voc, mix);
    si.push_back(track.si_sdr);
    base.push_back(track.baseline);
    improvement.push_back(track.si_sdr - track.baseline);
    out.per_track.push_back(std::move(track));
  }
  out.median_si_sdr = Median(si);
  out.mean_si_sdr = Mean(si);
  out.median_baseline = Median(base);
  out.mean_baseline = Mean(base);
  out.median_improvement = Median(improvement);
  out.mean_improvement = Mean(improvement);
  return out;
}

void SaveSeparatorBundle(const std::string& dir, const SeparatorConfig& cfg,
                         const nn::ParameterSet& params) {
  nn::BundleInfo info;
  info.architecture = kArchitecture;
  info.hyperparameters = {
      {"bins", cfg.bins},
      {"enc1", cfg.enc1},
      {"enc2", cfg.enc2},
      {"enc3", cfg.enc3},
      {"kernel", cfg.kernel},
      {"stride", cfg.stride},
      {"skip_kind", SkipKindName(cfg.skip_kind)},
      {"snippet_seconds", cfg.snippet_seconds},
  };
  nn::SaveBundle(dir, info, params);
}

SeparatorConfig LoadSeparatorBundle(const std::string& dir,
                                    nn::ParameterSet& params) {
  nn::BundleInfo info = nn::LoadBundle(dir, params);
  if (info.architecture != kArchitecture) {
    Throw(ErrorCode::kBadBundle,
          "expected architecture " + std::string(kArchitecture) + ", found " +
              info.architecture);
  }
  SeparatorConfig cfg;
  const nlohmann::json& h = info.hyperparameters;
  cfg.bins = h.value("bins", cfg.bins);
  cfg.enc1 = h.value("enc1", cfg.enc1);
  cfg.enc2 = h.value("enc2", cfg.enc2);
  cfg.enc3 = h.value("enc3", cfg.enc3);
  cfg.kernel = h.value("kernel", cfg.kernel);
  cfg.stride = h.value("stride", cfg.stride);
  cfg.skip_kind =
      SkipKindFromName(h.value("skip_kind", std::string("gru")));
  cfg.snippet_seconds = h.value("snippet_seconds", cfg.snippet_seconds);
  return cfg;
}

}  // namespace voxid::sep
