// voxid/test_acceptance.cc

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

// Acceptance gate for the whole toolchain: nine numbered checks, one PASS or
// FAIL line each, exit code equal to the number of failures.  The first
// three run against the library alone; the rest drive the command line
// binary on a synthetic dataset (6 singers x 20 clips x 10 s) and reuse the
// bundles trained along the way, so they must run in order.
//
// Usage: test_acceptance <path-to-voxid-binary>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "test_util.h"
#include "voxid/audio.h"
#include "voxid/bundle.h"
#include "voxid/classifier.h"
#include "voxid/error.h"
#include "voxid/features.h"
#include "voxid/gradcheck.h"
#include "voxid/params.h"
#include "voxid/rng.h"
#include "voxid/rnn.h"
#include "voxid/segmenter.h"
#include "voxid/separator.h"
#include "voxid/stft.h"
#include "voxid/synth.h"
#include "voxid/tape.h"
#include "voxid/tensor.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voxid;
using namespace voxid::nn;

namespace {

// Training recipes sized for a single desktop core.  Raising the budgets
// lifts the measured scores at the cost of wall time.
constexpr int kSegEpochs = 5, kSegSteps = 30, kSegBatch = 64;
constexpr int kSepEpochs = 5, kSepSteps = 40, kSepBatch = 4;
constexpr int kClsEpochs = 8, kClsSteps = 25, kClsBatch = 64;
// Clips with index >= 16 (4 of 20 per singer) are never trained on.
constexpr int kFirstHeldOutClip = 16;

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

std::string Num(double v, int precision = 3) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

std::string Sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(2) << v;
  return ss.str();
}

bool Report(int id, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "/9] " << detail
            << std::endl;
  return pass;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

Tensor RandomTensor(Shape shape, uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = scale * rng.NextGaussian();
  return t;
}

// Reduces any tensor to a scalar with distinct per-element weights so the
// whole output participates in the loss.
Var WeightedSum(Tape& tape, Var v) {
  // Copy the shape up front: adding nodes below may reallocate the tape's
  // value storage and invalidate references into it.
  Tensor w(tape.value(v).shape());
  const int n = static_cast<int>(w.numel());
  for (int64_t i = 0; i < w.numel(); ++i) w[i] = 0.05 * (i % 17) + 0.3;
  Var flat = tape.reshape(v, {1, n});
  Var wv = tape.reshape(tape.constant(std::move(w)), {n, 1});
  return tape.matmul(flat, wv);
}

// Dataset, manifests, bundles and scratch space shared between the checks.
struct World {
  std::string bin;
  testing::TempDir dir{"acceptance"};
  int next_io = 0;

  std::string dataset;
  std::string cls_manifest;
  std::string seg_train, seg_test;
  std::string pair_train, pair_test;
  std::string cls_train, cls_test;

  std::string seg_bundle;
  std::string sep_gru, sep_lstm;
  std::string cls_bundle;
  std::string config;       // seg_bundle + sep_gru + cls_bundle
  std::string config_lstm;  // sep_lstm only
};

CmdResult RunCli(World& w, const std::vector<std::string>& args) {
  const std::string out_path =
      w.dir.Path("io_out_" + std::to_string(w.next_io) + ".txt");
  const std::string err_path =
      w.dir.Path("io_err_" + std::to_string(w.next_io) + ".txt");
  ++w.next_io;
  std::string cmd = "'" + w.bin + "'";
  for (const std::string& a : args) cmd += " '" + a + "'";
  cmd += " > '" + out_path + "' 2> '" + err_path + "'";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = ReadFileBytes(out_path);
  r.err = ReadFileBytes(err_path);
  return r;
}

CmdResult Expect0(World& w, const std::vector<std::string>& args) {
  CmdResult r = RunCli(w, args);
  if (r.exit_code != 0) {
    std::string cmd;
    for (const std::string& a : args) cmd += a + " ";
    throw std::runtime_error("command '" + cmd + "' exited " +
                             std::to_string(r.exit_code) + ": " + r.err);
  }
  return r;
}

// Splits a JSONL manifest by the clip index embedded in the wav filename.
// Lines are copied verbatim, so relative paths keep resolving as long as
// the split files live beside the source manifest.
void SplitManifest(const std::string& src, const std::string& train_path,
                   const std::string& test_path) {
  std::ifstream in(src);
  if (!in) throw std::runtime_error("cannot open manifest " + src);
  std::ofstream train(train_path), test(test_path);
  const std::regex clip_re("clip_(\\d+)");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string path = j.contains("path")
                                 ? j.at("path").get<std::string>()
                                 : j.at("mixture").get<std::string>();
    std::smatch m;
    if (!std::regex_search(path, m, clip_re)) {
      throw std::runtime_error("no clip index in " + path);
    }
    (std::stoi(m[1]) >= kFirstHeldOutClip ? test : train) << line << "\n";
  }
}

// ---- [1/9] gradient correctness ----------------------------------------

bool CheckGradientCorrectness(World&) {
  Stopwatch sw;
  double worst = 0.0;
  std::string worst_site = "none";
  auto track = [&](const char* site, const GradCheckReport& r) {
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_site = site;
    }
  };

  {
    ParameterSet ps;
    ps.Create("w", RandomTensor({4, 3}, 7, 0.5));
    ps.Create("b", RandomTensor({3}, 8, 0.5));
    Tensor x = RandomTensor({2, 4}, 9);
    track("dense", CheckGradients(
                       [&](Tape& tape) {
                         Var out = tape.dense(tape.constant(x),
                                              tape.param(ps.Get("w")),
                                              tape.param(ps.Get("b")));
                         return WeightedSum(tape, tape.tanh(out));
                       },
                       ps));
  }
  {
    ParameterSet ps;
    ps.Create("k", RandomTensor({3, 2, 3, 3}, 11, 0.4));
    ps.Create("k_even", RandomTensor({2, 3, 2, 2}, 12, 0.4));
    ps.Create("b", RandomTensor({3}, 13, 0.2));
    ps.Create("b2", RandomTensor({2}, 14, 0.2));
    Tensor x = RandomTensor({1, 2, 8, 8}, 15, 0.5);
    track("conv2d", CheckGradients(
                        [&](Tape& tape) {
                          Var h = tape.relu(tape.conv2d_same(
                              tape.constant(x), tape.param(ps.Get("k")),
                              tape.param(ps.Get("b"))));
                          Var h2 =
                              tape.conv2d_same(h, tape.param(ps.Get("k_even")),
                                               tape.param(ps.Get("b2")));
                          return WeightedSum(tape, tape.tanh(h2));
                        },
                        ps));
  }
  {
    ParameterSet ps;
    Tensor x({1, 1, 4, 4});
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = 0.37 * i - 2.0;
    ps.Create("x", std::move(x));
    track("maxpool2d",
          CheckGradients(
              [&](Tape& tape) {
                return WeightedSum(tape,
                                   tape.maxpool2d(tape.param(ps.Get("x")), 2,
                                                  2));
              },
              ps));
  }
  {
    ParameterSet ps;
    ps.Create("k", RandomTensor({3, 2, 5}, 23, 0.4));
    ps.Create("b", RandomTensor({3}, 24, 0.2));
    Tensor x = RandomTensor({2, 2, 12}, 25, 0.5);
    track("conv1d", CheckGradients(
                        [&](Tape& tape) {
                          Var h = tape.conv1d(tape.constant(x),
                                              tape.param(ps.Get("k")),
                                              tape.param(ps.Get("b")), 2);
                          return WeightedSum(tape, tape.tanh(h));
                        },
                        ps));
  }
  {
    ParameterSet ps;
    ps.Create("k", RandomTensor({3, 2, 5}, 32, 0.4));
    ps.Create("b", RandomTensor({2}, 33, 0.2));
    Tensor x = RandomTensor({1, 3, 10}, 34, 0.5);
    track("conv1d_transpose",
          CheckGradients(
              [&](Tape& tape) {
                Var h = tape.conv1d_transpose(tape.constant(x),
                                              tape.param(ps.Get("k")),
                                              tape.param(ps.Get("b")), 2);
                return WeightedSum(tape, tape.tanh(h));
              },
              ps));
  }
  {
    ParameterSet ps;
    Rng rng(36);
    CreateGruParams(ps, "g", 3, 4, rng);
    Tensor x = RandomTensor({5 * 2, 3}, 37, 0.5);
    track("gru", CheckGradients(
                     [&](Tape& tape) {
                       Var out = GruSeq(tape, tape.constant(x), 5, 2, 4,
                                        BindGru(tape, ps, "g"));
                       return WeightedSum(tape, out);
                     },
                     ps));
  }
  {
    ParameterSet ps;
    Rng rng(41);
    const int hidden = 4, T = 5, in = 3;
    CreateLstmParams(ps, "l0.fw", in, hidden, rng);
    CreateLstmParams(ps, "l0.bw", in, hidden, rng);
    CreateLstmParams(ps, "l1.fw", 2 * hidden, hidden, rng);
    CreateLstmParams(ps, "l1.bw", 2 * hidden, hidden, rng);
    Tensor x = RandomTensor({T, in}, 42, 0.5);
    track("bilstm", CheckGradients(
                        [&](Tape& tape) {
                          Var h = tape.constant(x);
                          for (const char* name : {"l0", "l1"}) {
                            h = BilstmLayer(
                                tape, h, T, 1, hidden,
                                BindLstm(tape, ps, std::string(name) + ".fw"),
                                BindLstm(tape, ps, std::string(name) + ".bw"));
                          }
                          return WeightedSum(tape, h);
                        },
                        ps));
  }
  {
    ParameterSet ps;
    ps.Create("logits", RandomTensor({3, 4}, 48));
    track("softmax_xent",
          CheckGradients(
              [&](Tape& tape) {
                return tape.softmax_xent(tape.param(ps.Get("logits")),
                                         {1, 3, 0})
                    .loss;
              },
              ps));
  }
  {
    ParameterSet ps;
    ps.Create("pred", RandomTensor({4, 4}, 50));
    Tensor target = RandomTensor({4, 4}, 51);
    track("l1_loss", CheckGradients(
                         [&](Tape& tape) {
                           return tape.l1_loss(tape.param(ps.Get("pred")),
                                               tape.constant(target));
                         },
                         ps));
  }

  // Full networks at reduced size.
  {
    seg::SegmenterConfig cfg;
    cfg.window_frames = 20;
    cfg.feature_dims = 20;
    cfg.conv1_filters = 4;
    cfg.conv1_kernel = 5;
    cfg.conv2_filters = 3;
    cfg.conv2_kernel = 3;
    cfg.dense1 = 8;
    cfg.dense2 = 8;
    // At width 8 the default dropout rate can zero a whole activation row,
    // parking zero-initialized biases exactly on the relu kink where
    // subgradients and finite differences legitimately disagree.
    cfg.drop1 = 0.25;
    cfg.drop2 = 0.25;
    ParameterSet ps;
    Rng init_rng(62);
    seg::InitSegmenterParams(ps, cfg, init_rng);
    Tensor windows =
        RandomTensor({2, 1, cfg.window_frames, cfg.feature_dims}, 63, 0.5);
    track("segmenter network",
          CheckGradients(
              [&](Tape& tape) {
                Rng drop_rng(64);  // same masks on every graph rebuild
                Var logits = seg::SegnetLogits(tape, ps, cfg,
                                               tape.constant(windows),
                                               drop_rng);
                return tape.softmax_xent(logits, {0, 1}).loss;
              },
              ps));
  }
  {
    sep::SeparatorConfig cfg;
    cfg.bins = 5;
    cfg.enc1 = 4;
    cfg.enc2 = 3;
    cfg.enc3 = 2;
    cfg.kernel = 3;
    ParameterSet ps;
    Rng init_rng(65);
    sep::InitSeparatorParams(ps, cfg, init_rng);
    Tensor x = RandomTensor({1, cfg.bins, 16}, 66, 0.5);
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = std::abs(x[i]);
    Tensor target = RandomTensor({1, cfg.bins, 16}, 67, 0.5);
    for (int64_t i = 0; i < target.numel(); ++i) {
      target[i] = std::abs(target[i]);
    }
    track("separator network",
          CheckGradients(
              [&](Tape& tape) {
                Var out = sep::SepnetForward(tape, ps, cfg, tape.constant(x));
                return tape.l1_loss(out, tape.constant(target));
              },
              ps));
  }
  {
    cls::ClassifierConfig cfg;
    cfg.feature_dims = 6;
    cfg.hidden = 3;
    cfg.num_singers = 3;
    ParameterSet ps;
    Rng init_rng(68);
    cls::InitClassifierParams(ps, cfg, init_rng);
    const int T = 5, batch = 2;
    Tensor x = RandomTensor({T * batch, cfg.feature_dims}, 69, 0.5);
    track("classifier network",
          CheckGradients(
              [&](Tape& tape) {
                Var logits = cls::ClassnetLogits(tape, ps, cfg,
                                                 tape.constant(x), T, batch);
                return tape.softmax_xent(logits, {0, 2}).loss;
              },
              ps));
  }

  const double secs = sw.Seconds();
  const bool pass = worst < 1e-4 && secs < 300.0;
  return Report(1, pass,
                "layer and network gradients vs central differences: max rel "
                "err " + Sci(worst) + " at " + worst_site +
                " (limit 1e-4), " + Num(secs) + " s (limit 300 s)");
}

// ---- [2/9] viterbi exactness --------------------------------------------

bool CheckViterbiExactness(World&) {
  Stopwatch sw;
  Rng rng(977);
  int mismatches = 0;
  int64_t frames = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = 1 + static_cast<int>(rng.NextBelow(12));
    seg::FrameProbs probs;
    probs.hop_seconds = 0.010;
    probs.p_vocal.resize(T);
    for (double& p : probs.p_vocal) p = 0.02 + 0.96 * rng.NextDouble();
    seg::TransitionModel tm;
    tm.p_stay_vocal = 0.05 + 0.9 * rng.NextDouble();
    tm.p_stay_nonvocal = 0.05 + 0.9 * rng.NextDouble();
    tm.prior_vocal = 0.1 + 0.8 * rng.NextDouble();
    if (seg::ViterbiSmooth(probs, tm) !=
        testing::EnumerateMapPath(probs.p_vocal, tm)) {
      ++mismatches;
    }
    frames += T;
  }
  const double secs = sw.Seconds();
  const bool pass = mismatches == 0 && secs < 10.0;
  return Report(2, pass,
                "viterbi equals exhaustive enumeration on 1000 random "
                "instances (" + std::to_string(frames) + " frames): " +
                std::to_string(mismatches) + " mismatches, " + Num(secs) +
                " s (limit 10 s)");
}

// ---- [3/9] dsp oracles ----------------------------------------------------

bool CheckDspOracles(World&) {
  // Analysis-synthesis round trip on one second of noise.
  signal::AudioBuffer a = testing::NoiseBuffer(1.0, 311);
  signal::AudioBuffer recon = signal::Istft(signal::Stft(a, {}));
  const double stft_err = testing::RelativeL2(a.samples, recon.samples);

  // Fast features against the quadratic-time reference.
  signal::AudioBuffer m = testing::NoiseBuffer(0.3, 312);
  signal::FeatureMatrix f = signal::Mfcc(signal::Stft(m, {}));
  std::vector<std::vector<double>> oracle =
      testing::NaiveMfcc(m, 512, 160, 26, 13);
  double num = 0.0, den = 0.0;
  for (size_t t = 0; t < oracle.size(); ++t) {
    for (int k = 0; k < 13; ++k) {
      num += (f.data[t][k] - oracle[t][k]) * (f.data[t][k] - oracle[t][k]);
      den += oracle[t][k] * oracle[t][k];
    }
  }
  const double mfcc_err = std::sqrt(num / den);

  // Magnitude compression round trip.
  Rng rng(313);
  std::vector<std::vector<double>> mag(
      40, std::vector<double>(257, 0.0));
  for (auto& row : mag) {
    for (double& v : row) v = 10.0 * rng.NextDouble();
  }
  const auto back = signal::Expm1Expand(signal::Log1pCompress(mag));
  double comp_err = 0.0;
  for (size_t r = 0; r < mag.size(); ++r) {
    for (size_t c = 0; c < mag[r].size(); ++c) {
      comp_err = std::max(comp_err, std::abs(back[r][c] - mag[r][c]) /
                                        std::max(1.0, mag[r][c]));
    }
  }

  const bool pass = stft_err < 1e-6 && mfcc_err < 1e-6 && comp_err < 1e-9;
  return Report(3, pass,
                "dsp oracles: istft(stft(x)) rel err " + Sci(stft_err) +
                " (limit 1e-6), mfcc vs naive dft rel err " + Sci(mfcc_err) +
                " (limit 1e-6), log1p/expm1 round trip " + Sci(comp_err) +
                " (limit 1e-9)");
}

// ---- [4/9] segmentation quality -------------------------------------------

bool CheckSegmentation(World& w) {
  // Build the shared dataset and the held-out splits.
  w.dataset = w.dir.Path("data");
  CmdResult synth = Expect0(w, {"synth-data", "--out", w.dataset});
  const json paths = json::parse(synth.out);
  const std::string seg_manifest =
      paths.at("segmentation_manifest").get<std::string>();
  const std::string pair_manifest =
      paths.at("pair_manifest").get<std::string>();
  w.cls_manifest = paths.at("classification_manifest").get<std::string>();
  w.seg_train = w.dataset + "/seg_train.jsonl";
  w.seg_test = w.dataset + "/seg_test.jsonl";
  w.pair_train = w.dataset + "/pair_train.jsonl";
  w.pair_test = w.dataset + "/pair_test.jsonl";
  w.cls_train = w.dataset + "/cls_train.jsonl";
  w.cls_test = w.dataset + "/cls_test.jsonl";
  SplitManifest(seg_manifest, w.seg_train, w.seg_test);
  SplitManifest(pair_manifest, w.pair_train, w.pair_test);
  SplitManifest(w.cls_manifest, w.cls_train, w.cls_test);

  w.seg_bundle = w.dir.Path("seg_bundle");
  w.sep_gru = w.dir.Path("sep_gru");
  w.sep_lstm = w.dir.Path("sep_lstm");
  w.cls_bundle = w.dir.Path("cls_bundle");
  w.config = w.dir.Path("pipeline.json");
  WriteFileBytes(w.config, json{{"seg_bundle", "seg_bundle"},
                                {"sep_bundle", "sep_gru"},
                                {"cls_bundle", "cls_bundle"}}
                               .dump());
  w.config_lstm = w.dir.Path("pipeline_lstm.json");
  WriteFileBytes(w.config_lstm, json{{"sep_bundle", "sep_lstm"}}.dump());

  Stopwatch sw;
  Expect0(w, {"train-seg", "--data", w.seg_train, "--out", w.seg_bundle,
              "--epochs", std::to_string(kSegEpochs), "--steps-per-epoch",
              std::to_string(kSegSteps), "--batch",
              std::to_string(kSegBatch)});
  const std::string report = w.dir.Path("seg_report.json");
  Expect0(w, {"--config", w.config, "eval-seg", "--data", w.seg_test,
              "--report", report});
  const double secs = sw.Seconds();

  const json j = json::parse(ReadFileBytes(report));
  const double accuracy =
      j.at("cnn_viterbi").at("frame_accuracy").get<double>();
  const double smoothed =
      j.at("cnn_viterbi").at("mean_precision").get<double>();
  const double plain = j.at("cnn").at("mean_precision").get<double>();
  const bool pass =
      accuracy >= 0.95 && smoothed >= plain && secs < 900.0;
  return Report(4, pass,
                "held-out vocal segmentation: frame accuracy " +
                Num(accuracy) + " (need >= 0.95), smoothed mean precision " +
                Num(smoothed) + " vs plain " + Num(plain) +
                " (need >=), train+eval " + Num(secs) + " s (limit 900 s)");
}

// ---- [5/9] separation quality ---------------------------------------------

bool CheckSeparation(World& w) {
  Stopwatch sw;
  auto train_and_eval = [&](const std::string& kind,
                            const std::string& bundle,
                            const std::string& config) {
    Expect0(w, {"train-sep", "--data", w.pair_train, "--out", bundle,
                "--skip-kind", kind, "--epochs", std::to_string(kSepEpochs),
                "--steps-per-epoch", std::to_string(kSepSteps), "--batch",
                std::to_string(kSepBatch)});
    const std::string report = w.dir.Path("sep_report_" + kind + ".json");
    Expect0(w, {"--config", config, "eval-sep", "--data", w.pair_test,
                "--report", report});
    return json::parse(ReadFileBytes(report))
        .at("median_improvement")
        .get<double>();
  };
  const double gru_med = train_and_eval("gru", w.sep_gru, w.config);
  const double lstm_med = train_and_eval("lstm", w.sep_lstm, w.config_lstm);
  const double secs = sw.Seconds();

  const bool pass =
      gru_med >= 5.0 && gru_med >= lstm_med - 0.5 && secs < 1800.0;
  return Report(5, pass,
                "held-out separation, median si-sdr improvement: gru " +
                Num(gru_med) + " dB (need >= 5), lstm " + Num(lstm_med) +
                " dB (gru must stay within 0.5 dB), train+eval " + Num(secs) +
                " s (limit 1800 s)");
}

// ---- [6/9] classification quality -------------------------------------------

bool CheckClassification(World& w) {
  Stopwatch sw;
  const std::string report = w.dir.Path("cls_report.json");
  Expect0(w, {"--config", w.config, "eval-cls", "--data", w.cls_manifest,
              "--report", report, "--epochs", std::to_string(kClsEpochs),
              "--steps-per-epoch", std::to_string(kClsSteps), "--batch",
              std::to_string(kClsBatch)});
  const double secs = sw.Seconds();

  const json j = json::parse(ReadFileBytes(report));
  const double sep_f1 =
      j.at("separated").at("song_level").at("macro_f1").get<double>();
  const double raw_f1 =
      j.at("raw").at("song_level").at("macro_f1").get<double>();
  const bool pass = sep_f1 >= 0.90 && sep_f1 >= raw_f1 && secs < 1800.0;
  return Report(6, pass,
                "5-fold singer classification, song-level macro f1: "
                "separated " + Num(sep_f1) + " (need >= 0.90), raw " +
                Num(raw_f1) + " (separated must not trail), " + Num(secs) +
                " s (limit 1800 s)");
}

// ---- [7/9] determinism -----------------------------------------------------

bool CheckDeterminism(World& w) {
  // Identical seeds must give bit-identical bundles ...
  const std::string det_a = w.dir.Path("det_a");
  const std::string det_b = w.dir.Path("det_b");
  for (const std::string& out : {det_a, det_b}) {
    Expect0(w, {"train-seg", "--data", w.seg_train, "--out", out, "--epochs",
                "1", "--steps-per-epoch", "5", "--batch", "16"});
  }
  bool bundles_equal = true;
  for (const char* name : {"weights.bin", "arch.json", "training_log.json"}) {
    bundles_equal = bundles_equal &&
                    ReadFileBytes(det_a + "/" + name) ==
                        ReadFileBytes(det_b + "/" + name);
  }

  // ... and bit-identical evaluation reports.
  const std::string rep_a = w.dir.Path("det_rep_a.json");
  const std::string rep_b = w.dir.Path("det_rep_b.json");
  for (const std::string& rep : {rep_a, rep_b}) {
    Expect0(w, {"--config", w.config, "eval-seg", "--data", w.seg_test,
                "--report", rep});
  }
  const bool reports_equal = ReadFileBytes(rep_a) == ReadFileBytes(rep_b);

  const bool pass = bundles_equal && reports_equal;
  return Report(7, pass,
                std::string("seeded reruns are bit-identical: bundles ") +
                (bundles_equal ? "match" : "differ") + ", reports " +
                (reports_equal ? "match" : "differ"));
}

// ---- [8/9] bundle persistence ----------------------------------------------

bool CheckPersistence(World& w) {
  nn::ParameterSet params;
  seg::SegmenterConfig cfg = seg::LoadSegmenterBundle(w.seg_bundle, params);
  const std::string resaved = w.dir.Path("seg_resaved");
  seg::SaveSegmenterBundle(resaved, cfg, params);
  const bool identical = ReadFileBytes(w.seg_bundle + "/weights.bin") ==
                         ReadFileBytes(resaved + "/weights.bin");

  std::string bytes = ReadFileBytes(resaved + "/weights.bin");
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
  WriteFileBytes(resaved + "/weights.bin", bytes);
  bool rejected = false;
  try {
    nn::ParameterSet corrupted;
    seg::LoadSegmenterBundle(resaved, corrupted);
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kChecksumMismatch;
  }

  const bool pass = identical && rejected;
  return Report(8, pass,
                std::string("bundle persistence: save-load-save weights ") +
                (identical ? "byte-identical" : "differ") +
                ", corrupted checksum " +
                (rejected ? "rejected" : "NOT rejected"));
}

// ---- [9/9] end-to-end identification -----------------------------------------

bool CheckIdentification(World& w) {
  Stopwatch sw;
  Expect0(w, {"--config", w.config, "train-cls", "--data", w.cls_train,
              "--out", w.cls_bundle, "--epochs", std::to_string(kClsEpochs),
              "--steps-per-epoch", std::to_string(kClsSteps), "--batch",
              std::to_string(kClsBatch)});

  std::ifstream in(w.cls_test);
  std::string line;
  int total = 0, correct = 0;
  double worst_sum_err = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json item = json::parse(line);
    const std::string wav =
        (fs::path(w.dataset) / item.at("path").get<std::string>()).string();
    CmdResult r = Expect0(w, {"--config", w.config, "identify", "--in", wav});
    const json pred = json::parse(r.out);
    double sum = 0.0;
    for (const auto& [name, p] : pred.at("distribution").items()) {
      (void)name;
      sum += p.get<double>();
    }
    worst_sum_err = std::max(worst_sum_err, std::abs(sum - 1.0));
    ++total;
    if (pred.at("singer").get<std::string>() ==
        item.at("singer").get<std::string>()) {
      ++correct;
    }
  }

  // A purely instrumental clip must be refused with the dedicated code.
  const std::string inst_wav = w.dir.Path("instrumental.wav");
  signal::WriteWav(inst_wav, synth::SynthInstrumental(8.0, 4242));
  CmdResult inst =
      RunCli(w, {"--config", w.config, "identify", "--in", inst_wav});

  const double frac = total > 0 ? static_cast<double>(correct) / total : 0.0;
  const bool pass = total > 0 && worst_sum_err <= 1e-9 && frac >= 0.90 &&
                    inst.exit_code == 3;
  return Report(9, pass,
                "end-to-end identification: " + std::to_string(correct) +
                "/" + std::to_string(total) + " held-out clips correct (" +
                Num(100.0 * frac) + "%, need >= 90%), max distribution sum "
                "error " + Sci(worst_sum_err) +
                " (limit 1e-9), instrumental input exit code " +
                std::to_string(inst.exit_code) + " (want 3), " + Num(sw.Seconds()) +
                " s");
}

template <typename F>
bool Guard(int id, F f, World& w) {
  try {
    return f(w);
  } catch (const std::exception& e) {
    return Report(id, false, std::string("unexpected error: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_acceptance <path-to-voxid-binary>\n";
    return 64;
  }
  World w;
  w.bin = fs::absolute(argv[1]).string();

  int failures = 0;
  failures += !Guard(1, CheckGradientCorrectness, w);
  failures += !Guard(2, CheckViterbiExactness, w);
  failures += !Guard(3, CheckDspOracles, w);
  failures += !Guard(4, CheckSegmentation, w);
  failures += !Guard(5, CheckSeparation, w);
  failures += !Guard(6, CheckClassification, w);
  failures += !Guard(7, CheckDeterminism, w);
  failures += !Guard(8, CheckPersistence, w);
  failures += !Guard(9, CheckIdentification, w);

  std::cout << (9 - failures) << "/9 acceptance checks passed" << std::endl;
  return failures;
}
