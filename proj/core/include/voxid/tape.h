// voxid/tape.h

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

#ifndef VOXID_TAPE_H_
#define VOXID_TAPE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "voxid/params.h"
#include "voxid/rng.h"
#include "voxid/tensor.h"

namespace voxid::nn {

// Handle into a Tape.  Only meaningful for the tape that produced it.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape.  Every operation records its output value plus a
// closure that scatters the output gradient back to its inputs; backward()
// replays the closures in reverse creation order.  A tape covers exactly one
// forward/backward pass — build a fresh one per training step.
//
// All op outputs are checked for NaN/Inf and fail hard on violation.
class Tape {
 public:
  explicit Tape(bool training) : training_(training) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool training() const { return training_; }

  Var constant(Tensor value);
  // Binds a parameter's value into the graph.  Repeated calls with the same
  // parameter return the same Var; after backward() the accumulated
  // gradient is added into p.grad.
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  // Gradient of the backward() root w.r.t. v; zeros if none flowed.
  const Tensor& grad(Var v);

  // ---- elementwise ----
  Var add(Var a, Var b);  // same shape, or [m,n] + [n] row broadcast
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var one_minus(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);

  // ---- shape plumbing ----
  Var reshape(Var a, Shape shape);
  Var slice_rows(Var a, int begin, int end);
  Var slice_cols(Var a, int begin, int end);
  Var concat_cols(const std::vector<Var>& parts);
  Var stack_rows(const std::vector<Var>& parts);
  Var mean_of(const std::vector<Var>& parts);
  // [B,C,T] -> time-major matrix [T*B, C] with row index t*B + b.
  Var to_time_major(Var a);
  // Inverse of to_time_major: [T*B, C] -> [B,C,T].
  Var from_time_major(Var a, int batch);

  // ---- linear algebra / layers ----
  Var matmul(Var a, Var b);             // [m,k] x [k,n]
  Var dense(Var x, Var w, Var b);       // x*W + b
  // x [B,C,H,W], k [F,C,kh,kw], b [F]; zero-padded "same", stride 1.  Even
  // kernels put the extra padding on the trailing side.
  Var conv2d_same(Var x, Var k, Var b);
  // Non-overlapping pooling; trailing remainder truncated.  Gradient goes
  // to the first argmax within each window.
  Var maxpool2d(Var x, int ph, int pw);
  // x [B,C,T], k [F,C,kt]; zero-padded so T' = ceil(T/stride).
  Var conv1d(Var x, Var k, Var b, int stride);
  // x [B,C,T], k [C,F,kt]; output [B,F,stride*T], overhang cropped
  // symmetrically (extra crop on the trailing side).  Adjoint of conv1d for
  // stride 1 with a shared kernel tensor.
  Var conv1d_transpose(Var x, Var k, Var b, int stride);
  // Inverted dropout: zero with probability drop_prob, scale survivors by
  // 1/(1-drop_prob).  Identity (same Var) when not training.
  Var dropout(Var a, double drop_prob, Rng& rng);

  // ---- losses ----
  struct XentResult {
    Var loss;      // scalar, mean over the batch
    Tensor probs;  // [batch, classes] softmax probabilities
  };
  XentResult softmax_xent(Var logits, const std::vector<int>& labels);
  Var l1_loss(Var pred, Var target);  // mean |pred - target|

  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first accumulation
    Parameter* bound = nullptr;
    std::function<void()> back;
  };

  Var Emit(const char* op, Tensor value, std::function<void()> back);
  Tensor& GradRef(int id);
  const Tensor& Val(int id) const {
    const Node& n = nodes_[id];
    return n.bound ? n.bound->value : n.value;
  }
  void CheckId(Var v) const;

  bool training_ = false;
  bool ran_backward_ = false;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, Var> bound_;
};

// Numerically stable row-wise softmax of a plain matrix (inference paths).
Tensor SoftmaxRows(const Tensor& logits);

}  // namespace voxid::nn

#endif  // VOXID_TAPE_H_
