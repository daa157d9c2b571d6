// voxid/rnn.h

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

#ifndef VOXID_RNN_H_
#define VOXID_RNN_H_

#include <string>

#include "voxid/params.h"
#include "voxid/tape.h"

namespace voxid::nn {

// Recurrent layers built from tape primitives.  Sequence tensors are
// time-major matrices [T*batch, dims] with row index t*batch + b; hidden
// and cell states start at zero.

// GRU gate blocks are packed [update z | reset r | candidate n] along the
// column axis of wx [in, 3H], wh [H, 3H], b [3H].
struct GruWeights {
  Var wx, wh, b;
};

// LSTM gate blocks are packed [input i | forget f | cell g | output o];
// wx [in, 4H], wh [H, 4H], b [4H].
struct LstmWeights {
  Var wx, wh, b;
};

// Parameter creation registers "<prefix>.wx", "<prefix>.wh", "<prefix>.b".
// LSTM forget-gate biases start at 1, every other bias at 0.
void CreateGruParams(ParameterSet& ps, const std::string& prefix, int in,
                     int hidden, Rng& rng);
void CreateLstmParams(ParameterSet& ps, const std::string& prefix, int in,
                      int hidden, Rng& rng);
GruWeights BindGru(Tape& tape, ParameterSet& ps, const std::string& prefix);
LstmWeights BindLstm(Tape& tape, ParameterSet& ps, const std::string& prefix);

// x [T*batch, in] -> hidden sequence [T*batch, hidden].
Var GruSeq(Tape& tape, Var x, int T, int batch, int hidden,
           const GruWeights& w);

// reverse=true walks time back-to-front; outputs stay in original order.
Var LstmSeq(Tape& tape, Var x, int T, int batch, int hidden,
            const LstmWeights& w, bool reverse);

// Forward and backward LSTM over the same input, outputs concatenated to
// [T*batch, 2*hidden].
Var BilstmLayer(Tape& tape, Var x, int T, int batch, int hidden,
                const LstmWeights& fw, const LstmWeights& bw);

}  // namespace voxid::nn

#endif  // VOXID_RNN_H_
