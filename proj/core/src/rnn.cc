// voxid/rnn.cc

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

#include "voxid/rnn.h"

#include <vector>

#include "voxid/error.h"

namespace voxid::nn {

namespace {

void CheckSeqInput(const char* op, const Tensor& x, int T, int batch, int in) {
  if (x.ndim() != 2 || x.dim(0) != T * batch || x.dim(1) != in) {
    Throw(ErrorCode::kShapeMismatch,
          std::string(op) + ": input " + ShapeToString(x.shape()) +
              " does not match T=" + std::to_string(T) +
              " batch=" + std::to_string(batch) + " in=" + std::to_string(in));
  }
  if (T < 1) {
    Throw(ErrorCode::kInvalidArgument,
          std::string(op) + ": sequence length must be >= 1");
  }
}

}  // namespace

void CreateGruParams(ParameterSet& ps, const std::string& prefix, int in,
                     int hidden, Rng& rng) {
  ps.Create(prefix + ".wx",
            Tensor::GlorotInit({in, 3 * hidden}, in, 3 * hidden, rng));
  ps.Create(prefix + ".wh",
            Tensor::GlorotInit({hidden, 3 * hidden}, hidden, 3 * hidden, rng));
  ps.Create(prefix + ".b", Tensor::Zeros({3 * hidden}));
}

void CreateLstmParams(ParameterSet& ps, const std::string& prefix, int in,
                      int hidden, Rng& rng) {
  ps.Create(prefix + ".wx",
            Tensor::GlorotInit({in, 4 * hidden}, in, 4 * hidden, rng));
  ps.Create(prefix + ".wh",
            Tensor::GlorotInit({hidden, 4 * hidden}, hidden, 4 * hidden, rng));
  Tensor b = Tensor::Zeros({4 * hidden});
  for (int j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
  ps.Create(prefix + ".b", std::move(b));
}

GruWeights BindGru(Tape& tape, ParameterSet& ps, const std::string& prefix) {
  return GruWeights{tape.param(ps.Get(prefix + ".wx")),
                    tape.param(ps.Get(prefix + ".wh")),
                    tape.param(ps.Get(prefix + ".b"))};
}

LstmWeights BindLstm(Tape& tape, ParameterSet& ps, const std::string& prefix) {
  return LstmWeights{tape.param(ps.Get(prefix + ".wx")),
                     tape.param(ps.Get(prefix + ".wh")),
                     tape.param(ps.Get(prefix + ".b"))};
}

Var GruSeq(Tape& tape, Var x, int T, int batch, int hidden,
           const GruWeights& w) {
  const int in = tape.value(w.wx).dim(0);
  const int H = hidden;
  CheckSeqInput("gru_seq", tape.value(x), T, batch, in);
  Var xproj = tape.add(tape.matmul(x, w.wx), w.b);
  Var h = tape.constant(Tensor::Zeros({batch, H}));
  std::vector<Var> outs;
  outs.reserve(T);
  for (int t = 0; t < T; ++t) {
    Var xp = tape.slice_rows(xproj, t * batch, (t + 1) * batch);
    Var rp = tape.matmul(h, w.wh);
    Var z = tape.sigmoid(
        tape.add(tape.slice_cols(xp, 0, H), tape.slice_cols(rp, 0, H)));
    Var r = tape.sigmoid(
        tape.add(tape.slice_cols(xp, H, 2 * H), tape.slice_cols(rp, H, 2 * H)));
    Var n = tape.tanh(
        tape.add(tape.slice_cols(xp, 2 * H, 3 * H),
                 tape.mul(r, tape.slice_cols(rp, 2 * H, 3 * H))));
    h = tape.add(tape.mul(tape.one_minus(z), h), tape.mul(z, n));
    outs.push_back(h);
  }
  return tape.stack_rows(outs);
}

Var LstmSeq(Tape& tape, Var x, int T, int batch, int hidden,
            const LstmWeights& w, bool reverse) {
  const int in = tape.value(w.wx).dim(0);
  const int H = hidden;
  CheckSeqInput("lstm_seq", tape.value(x), T, batch, in);
  Var xproj = tape.add(tape.matmul(x, w.wx), w.b);
  Var h = tape.constant(Tensor::Zeros({batch, H}));
  Var c = tape.constant(Tensor::Zeros({batch, H}));
  std::vector<Var> outs(T);
  for (int s = 0; s < T; ++s) {
    const int t = reverse ? T - 1 - s : s;
    Var xp = tape.slice_rows(xproj, t * batch, (t + 1) * batch);
    Var rp = tape.matmul(h, w.wh);
    Var i = tape.sigmoid(
        tape.add(tape.slice_cols(xp, 0, H), tape.slice_cols(rp, 0, H)));
    Var f = tape.sigmoid(
        tape.add(tape.slice_cols(xp, H, 2 * H), tape.slice_cols(rp, H, 2 * H)));
    Var g = tape.tanh(tape.add(tape.slice_cols(xp, 2 * H, 3 * H),
                               tape.slice_cols(rp, 2 * H, 3 * H)));
    Var o = tape.sigmoid(tape.add(tape.slice_cols(xp, 3 * H, 4 * H),
                                  tape.slice_cols(rp, 3 * H, 4 * H)));
    c = tape.add(tape.mul(f, c), tape.mul(i, g));
    h = tape.mul(o, tape.tanh(c));
    outs[t] = h;
  }
  return tape.stack_rows(outs);
}

Var BilstmLayer(Tape& tape, Var x, int T, int batch, int hidden,
                const LstmWeights& fw, const LstmWeights& bw) {
  Var hf = LstmSeq(tape, x, T, batch, hidden, fw, /*reverse=*/false);
  Var hb = LstmSeq(tape, x, T, batch, hidden, bw, /*reverse=*/true);
  return tape.concat_cols({hf, hb});
}

}  // namespace voxid::nn
