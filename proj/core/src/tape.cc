// voxid/tape.cc

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

#include "voxid/tape.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "voxid/error.h"

namespace voxid::nn {

namespace {

void RequireSameShape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.SameShape(b)) {
    Throw(ErrorCode::kShapeMismatch,
          std::string(op) + ": shapes " + ShapeToString(a.shape()) + " vs " +
              ShapeToString(b.shape()));
  }
}

void Require2d(const char* op, const Tensor& t) {
  if (t.ndim() != 2) {
    Throw(ErrorCode::kShapeMismatch,
          std::string(op) + ": expected a matrix, got " +
              ShapeToString(t.shape()));
  }
}

}  // namespace

Var Tape::Emit(const char* op, Tensor value, std::function<void()> back) {
  if (!value.AllFinite()) {
    Throw(ErrorCode::kNonFinite,
          std::string("non-finite values in output of ") + op);
  }
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Tensor& Tape::GradRef(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::Zeros(Val(id).shape());
  return n.grad;
}

void Tape::CheckId(Var v) const {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size())) {
    Throw(ErrorCode::kInvalidArgument, "Var does not belong to this tape");
  }
}

Var Tape::constant(Tensor value) {
  return Emit("constant", std::move(value), nullptr);
}

Var Tape::param(Parameter& p) {
  auto it = bound_.find(&p);
  if (it != bound_.end()) return it->second;
  if (!p.value.AllFinite()) {
    Throw(ErrorCode::kNonFinite, "non-finite values in parameter " + p.name);
  }
  Node n;
  n.bound = &p;
  nodes_.push_back(std::move(n));
  Var v{static_cast<int32_t>(nodes_.size() - 1)};
  bound_.emplace(&p, v);
  return v;
}

const Tensor& Tape::value(Var v) const {
  CheckId(v);
  return Val(v.id);
}

const Tensor& Tape::grad(Var v) {
  CheckId(v);
  return GradRef(v.id);
}

// ---------------------------------------------------------------- elementwise

Var Tape::add(Var a, Var b) {
  CheckId(a);
  CheckId(b);
  const Tensor& av = Val(a.id);
  const Tensor& bv = Val(b.id);
  const bool row_broadcast =
      av.ndim() == 2 && bv.ndim() == 1 && av.dim(1) == bv.dim(0);
  if (!row_broadcast) RequireSameShape("add", av, bv);
  Tensor out(av.shape());
  if (row_broadcast) {
    const int m = av.dim(0), n = av.dim(1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + bv[j];
  } else {
    for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + bv[i];
  }
  Var v = Emit("add", std::move(out), nullptr);
  const int aid = a.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, aid, bid, oid, row_broadcast]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    Tensor& gb = GradRef(bid);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
    if (row_broadcast) {
      const int n = static_cast<int>(gb.numel());
      const int m = static_cast<int>(g.numel()) / n;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gb[j] += g[i * n + j];
    } else {
      for (int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
    }
  };
  return v;
}

Var Tape::sub(Var a, Var b) {
  CheckId(a);
  CheckId(b);
  const Tensor& av = Val(a.id);
  const Tensor& bv = Val(b.id);
  RequireSameShape("sub", av, bv);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] - bv[i];
  Var v = Emit("sub", std::move(out), nullptr);
  const int aid = a.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, aid, bid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    Tensor& gb = GradRef(bid);
    for (int64_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  };
  return v;
}

Var Tape::mul(Var a, Var b) {
  CheckId(a);
  CheckId(b);
  const Tensor& av = Val(a.id);
  const Tensor& bv = Val(b.id);
  RequireSameShape("mul", av, bv);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * bv[i];
  Var v = Emit("mul", std::move(out), nullptr);
  const int aid = a.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, aid, bid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    const Tensor& av = Val(aid);
    const Tensor& bv = Val(bid);
    Tensor& ga = GradRef(aid);
    Tensor& gb = GradRef(bid);
    for (int64_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * bv[i];
      gb[i] += g[i] * av[i];
    }
  };
  return v;
}

Var Tape::scale(Var a, double s) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = s * av[i];
  Var v = Emit("scale", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid, s]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += s * g[i];
  };
  return v;
}

Var Tape::one_minus(Var a) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = 1.0 - av[i];
  Var v = Emit("one_minus", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] -= g[i];
  };
  return v;
}

Var Tape::relu(Var a) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  Var v = Emit("relu", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    const Tensor& av = Val(aid);
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i)
      if (av[i] > 0.0) ga[i] += g[i];
  };
  return v;
}

Var Tape::sigmoid(Var a) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  Var v = Emit("sigmoid", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    const Tensor& ov = nodes_[oid].value;
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i)
      ga[i] += g[i] * ov[i] * (1.0 - ov[i]);
  };
  return v;
}

Var Tape::tanh(Var a) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = std::tanh(av[i]);
  Var v = Emit("tanh", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    const Tensor& ov = nodes_[oid].value;
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i)
      ga[i] += g[i] * (1.0 - ov[i] * ov[i]);
  };
  return v;
}

// ------------------------------------------------------------ shape plumbing

Var Tape::reshape(Var a, Shape shape) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  if (ShapeNumel(shape) != av.numel()) {
    Throw(ErrorCode::kShapeMismatch,
          "reshape: " + ShapeToString(av.shape()) + " to " +
              ShapeToString(shape) + " changes element count");
  }
  Tensor out = av.Reshaped(shape);
  Var v = Emit("reshape", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
  };
  return v;
}

Var Tape::slice_rows(Var a, int begin, int end) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Require2d("slice_rows", av);
  const int m = av.dim(0), n = av.dim(1);
  if (begin < 0 || end > m || begin >= end) {
    Throw(ErrorCode::kInvalidArgument, "slice_rows: bad range [" +
                                           std::to_string(begin) + "," +
                                           std::to_string(end) + ") for " +
                                           std::to_string(m) + " rows");
  }
  Tensor out({end - begin, n});
  std::copy(av.data() + static_cast<int64_t>(begin) * n,
            av.data() + static_cast<int64_t>(end) * n, out.data());
  Var v = Emit("slice_rows", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid, begin, n]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    double* dst = ga.data() + static_cast<int64_t>(begin) * n;
    for (int64_t i = 0; i < g.numel(); ++i) dst[i] += g[i];
  };
  return v;
}

Var Tape::slice_cols(Var a, int begin, int end) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Require2d("slice_cols", av);
  const int m = av.dim(0), n = av.dim(1);
  if (begin < 0 || end > n || begin >= end) {
    Throw(ErrorCode::kInvalidArgument, "slice_cols: bad range [" +
                                           std::to_string(begin) + "," +
                                           std::to_string(end) + ") for " +
                                           std::to_string(n) + " columns");
  }
  const int w = end - begin;
  Tensor out({m, w});
  for (int i = 0; i < m; ++i)
    std::copy(av.data() + static_cast<int64_t>(i) * n + begin,
              av.data() + static_cast<int64_t>(i) * n + end,
              out.data() + static_cast<int64_t>(i) * w);
  Var v = Emit("slice_cols", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid, begin, m, n, w]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j)
        ga[static_cast<int64_t>(i) * n + begin + j] +=
            g[static_cast<int64_t>(i) * w + j];
  };
  return v;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) {
    Throw(ErrorCode::kInvalidArgument, "concat_cols: no inputs");
  }
  int m = -1, total = 0;
  for (Var p : parts) {
    CheckId(p);
    const Tensor& t = Val(p.id);
    Require2d("concat_cols", t);
    if (m < 0) m = t.dim(0);
    if (t.dim(0) != m) {
      Throw(ErrorCode::kShapeMismatch,
            "concat_cols: row counts disagree: " + std::to_string(m) +
                " vs " + std::to_string(t.dim(0)));
    }
    total += t.dim(1);
  }
  Tensor out({m, total});
  int off = 0;
  for (Var p : parts) {
    const Tensor& t = Val(p.id);
    const int w = t.dim(1);
    for (int i = 0; i < m; ++i)
      std::copy(t.data() + static_cast<int64_t>(i) * w,
                t.data() + static_cast<int64_t>(i + 1) * w,
                out.data() + static_cast<int64_t>(i) * total + off);
    off += w;
  }
  Var v = Emit("concat_cols", std::move(out), nullptr);
  std::vector<int> ids;
  std::vector<int> widths;
  for (Var p : parts) {
    ids.push_back(p.id);
    widths.push_back(Val(p.id).dim(1));
  }
  const int oid = v.id;
  nodes_[oid].back = [this, ids, widths, oid, m, total]() {
    const Tensor& g = nodes_[oid].grad;
    int off = 0;
    for (size_t pi = 0; pi < ids.size(); ++pi) {
      Tensor& gp = GradRef(ids[pi]);
      const int w = widths[pi];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
          gp[static_cast<int64_t>(i) * w + j] +=
              g[static_cast<int64_t>(i) * total + off + j];
      off += w;
    }
  };
  return v;
}

Var Tape::stack_rows(const std::vector<Var>& parts) {
  if (parts.empty()) {
    Throw(ErrorCode::kInvalidArgument, "stack_rows: no inputs");
  }
  int n = -1, total = 0;
  for (Var p : parts) {
    CheckId(p);
    const Tensor& t = Val(p.id);
    Require2d("stack_rows", t);
    if (n < 0) n = t.dim(1);
    if (t.dim(1) != n) {
      Throw(ErrorCode::kShapeMismatch,
            "stack_rows: column counts disagree: " + std::to_string(n) +
                " vs " + std::to_string(t.dim(1)));
    }
    total += t.dim(0);
  }
  Tensor out({total, n});
  int64_t off = 0;
  for (Var p : parts) {
    const Tensor& t = Val(p.id);
    std::copy(t.data(), t.data() + t.numel(), out.data() + off);
    off += t.numel();
  }
  Var v = Emit("stack_rows", std::move(out), nullptr);
  std::vector<int> ids;
  std::vector<int64_t> sizes;
  for (Var p : parts) {
    ids.push_back(p.id);
    sizes.push_back(Val(p.id).numel());
  }
  const int oid = v.id;
  nodes_[oid].back = [this, ids, sizes, oid]() {
    const Tensor& g = nodes_[oid].grad;
    int64_t off = 0;
    for (size_t pi = 0; pi < ids.size(); ++pi) {
      Tensor& gp = GradRef(ids[pi]);
      for (int64_t i = 0; i < sizes[pi]; ++i) gp[i] += g[off + i];
      off += sizes[pi];
    }
  };
  return v;
}

Var Tape::mean_of(const std::vector<Var>& parts) {
  if (parts.empty()) {
    Throw(ErrorCode::kInvalidArgument, "mean_of: no inputs");
  }
  const Tensor& first = Val(parts[0].id);
  for (Var p : parts) {
    CheckId(p);
    RequireSameShape("mean_of", first, Val(p.id));
  }
  const double inv = 1.0 / static_cast<double>(parts.size());
  Tensor out = Tensor::Zeros(first.shape());
  for (Var p : parts) {
    const Tensor& t = Val(p.id);
    for (int64_t i = 0; i < t.numel(); ++i) out[i] += t[i] * inv;
  }
  Var v = Emit("mean_of", std::move(out), nullptr);
  std::vector<int> ids;
  for (Var p : parts) ids.push_back(p.id);
  const int oid = v.id;
  nodes_[oid].back = [this, ids, oid, inv]() {
    const Tensor& g = nodes_[oid].grad;
    for (int id : ids) {
      Tensor& gp = GradRef(id);
      for (int64_t i = 0; i < g.numel(); ++i) gp[i] += g[i] * inv;
    }
  };
  return v;
}

Var Tape::to_time_major(Var a) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  if (av.ndim() != 3) {
    Throw(ErrorCode::kShapeMismatch,
          "to_time_major: expected [batch,ch,T], got " +
              ShapeToString(av.shape()));
  }
  const int B = av.dim(0), C = av.dim(1), T = av.dim(2);
  Tensor out({T * B, C});
  for (int bb = 0; bb < B; ++bb)
    for (int c = 0; c < C; ++c)
      for (int t = 0; t < T; ++t)
        out[(static_cast<int64_t>(t) * B + bb) * C + c] =
            av[(static_cast<int64_t>(bb) * C + c) * T + t];
  Var v = Emit("to_time_major", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid, B, C, T]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int bb = 0; bb < B; ++bb)
      for (int c = 0; c < C; ++c)
        for (int t = 0; t < T; ++t)
          ga[(static_cast<int64_t>(bb) * C + c) * T + t] +=
              g[(static_cast<int64_t>(t) * B + bb) * C + c];
  };
  return v;
}

Var Tape::from_time_major(Var a, int batch) {
  CheckId(a);
  const Tensor& av = Val(a.id);
  Require2d("from_time_major", av);
  if (batch < 1 || av.dim(0) % batch != 0) {
    Throw(ErrorCode::kShapeMismatch,
          "from_time_major: " + std::to_string(av.dim(0)) +
              " rows not divisible by batch " + std::to_string(batch));
  }
  const int B = batch, C = av.dim(1), T = av.dim(0) / batch;
  Tensor out({B, C, T});
  for (int bb = 0; bb < B; ++bb)
    for (int c = 0; c < C; ++c)
      for (int t = 0; t < T; ++t)
        out[(static_cast<int64_t>(bb) * C + c) * T + t] =
            av[(static_cast<int64_t>(t) * B + bb) * C + c];
  Var v = Emit("from_time_major", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid, B, C, T]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int bb = 0; bb < B; ++bb)
      for (int c = 0; c < C; ++c)
        for (int t = 0; t < T; ++t)
          ga[(static_cast<int64_t>(t) * B + bb) * C + c] +=
              g[(static_cast<int64_t>(bb) * C + c) * T + t];
  };
  return v;
}

// --------------------------------------------------------- linear alg/layers

Var Tape::matmul(Var a, Var b) {
  CheckId(a);
  CheckId(b);
  const Tensor& av = Val(a.id);
  const Tensor& bv = Val(b.id);
  Require2d("matmul", av);
  Require2d("matmul", bv);
  if (av.dim(1) != bv.dim(0)) {
    Throw(ErrorCode::kShapeMismatch,
          "matmul: " + ShapeToString(av.shape()) + " x " +
              ShapeToString(bv.shape()));
  }
  const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  GemmNN(m, n, k, av.data(), bv.data(), out.data(), false);
  Var v = Emit("matmul", std::move(out), nullptr);
  const int aid = a.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, aid, bid, oid, m, n, k]() {
    const Tensor& g = nodes_[oid].grad;
    const Tensor& av = Val(aid);
    const Tensor& bv = Val(bid);
    GemmNT(m, k, n, g.data(), bv.data(), GradRef(aid).data(), true);
    GemmTN(k, n, m, av.data(), g.data(), GradRef(bid).data(), true);
  };
  return v;
}

Var Tape::dense(Var x, Var w, Var b) { return add(matmul(x, w), b); }

Var Tape::conv2d_same(Var x, Var k, Var b) {
  CheckId(x);
  CheckId(k);
  CheckId(b);
  const Tensor& xv = Val(x.id);
  const Tensor& kv = Val(k.id);
  const Tensor& bv = Val(b.id);
  if (xv.ndim() != 4 || kv.ndim() != 4 || bv.ndim() != 1 ||
      xv.dim(1) != kv.dim(1) || bv.dim(0) != kv.dim(0)) {
    Throw(ErrorCode::kShapeMismatch,
          "conv2d_same: input " + ShapeToString(xv.shape()) + ", kernel " +
              ShapeToString(kv.shape()) + ", bias " +
              ShapeToString(bv.shape()));
  }
  const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const int F = kv.dim(0), kh = kv.dim(2), kw = kv.dim(3);
  if (kh > 2 * H || kw > 2 * W) {
    Throw(ErrorCode::kInvalidArgument,
          "conv2d_same: kernel " + std::to_string(kh) + "x" +
              std::to_string(kw) + " larger than twice the input " +
              std::to_string(H) + "x" + std::to_string(W));
  }
  const int pad_t = (kh - 1) / 2;
  const int pad_l = (kw - 1) / 2;
  const int64_t rows = static_cast<int64_t>(B) * H * W;
  const int colw = C * kh * kw;

  Tensor cols({static_cast<int>(rows), colw});
  {
    double* cp = cols.data();
    const double* xp = xv.data();
    for (int bb = 0; bb < B; ++bb)
      for (int oh = 0; oh < H; ++oh)
        for (int ow = 0; ow < W; ++ow) {
          for (int c = 0; c < C; ++c) {
            const double* plane =
                xp + (static_cast<int64_t>(bb) * C + c) * H * W;
            for (int dy = 0; dy < kh; ++dy) {
              const int ih = oh + dy - pad_t;
              for (int dx = 0; dx < kw; ++dx) {
                const int iw = ow + dx - pad_l;
                *cp++ = (ih >= 0 && ih < H && iw >= 0 && iw < W)
                            ? plane[static_cast<int64_t>(ih) * W + iw]
                            : 0.0;
              }
            }
          }
        }
  }

  Tensor out_rows({static_cast<int>(rows), F});
  GemmNT(static_cast<int>(rows), F, colw, cols.data(), kv.data(),
         out_rows.data(), false);
  for (int64_t r = 0; r < rows; ++r)
    for (int f = 0; f < F; ++f) out_rows[r * F + f] += bv[f];

  Tensor y({B, F, H, W});
  for (int bb = 0; bb < B; ++bb)
    for (int oh = 0; oh < H; ++oh)
      for (int ow = 0; ow < W; ++ow) {
        const int64_t r = (static_cast<int64_t>(bb) * H + oh) * W + ow;
        for (int f = 0; f < F; ++f)
          y[((static_cast<int64_t>(bb) * F + f) * H + oh) * W + ow] =
              out_rows[r * F + f];
      }

  Var v = Emit("conv2d_same", std::move(y), nullptr);
  const int xid = x.id, kid = k.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, xid, kid, bid, oid, B, C, H, W, F, kh, kw, pad_t,
                      pad_l, rows, colw, cols = std::move(cols)]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor gperm({static_cast<int>(rows), F});
    for (int bb = 0; bb < B; ++bb)
      for (int oh = 0; oh < H; ++oh)
        for (int ow = 0; ow < W; ++ow) {
          const int64_t r = (static_cast<int64_t>(bb) * H + oh) * W + ow;
          for (int f = 0; f < F; ++f)
            gperm[r * F + f] =
                g[((static_cast<int64_t>(bb) * F + f) * H + oh) * W + ow];
        }
    Tensor& gb = GradRef(bid);
    for (int64_t r = 0; r < rows; ++r)
      for (int f = 0; f < F; ++f) gb[f] += gperm[r * F + f];
    GemmTN(F, colw, static_cast<int>(rows), gperm.data(), cols.data(),
           GradRef(kid).data(), true);
    Tensor gcols({static_cast<int>(rows), colw});
    GemmNN(static_cast<int>(rows), colw, F, gperm.data(), Val(kid).data(),
           gcols.data(), false);
    Tensor& gx = GradRef(xid);
    const double* cp = gcols.data();
    for (int bb = 0; bb < B; ++bb)
      for (int oh = 0; oh < H; ++oh)
        for (int ow = 0; ow < W; ++ow) {
          for (int c = 0; c < C; ++c) {
            double* plane =
                gx.data() + (static_cast<int64_t>(bb) * C + c) * H * W;
            for (int dy = 0; dy < kh; ++dy) {
              const int ih = oh + dy - pad_t;
              for (int dx = 0; dx < kw; ++dx) {
                const int iw = ow + dx - pad_l;
                if (ih >= 0 && ih < H && iw >= 0 && iw < W)
                  plane[static_cast<int64_t>(ih) * W + iw] += *cp;
                ++cp;
              }
            }
          }
        }
  };
  return v;
}

Var Tape::maxpool2d(Var x, int ph, int pw) {
  CheckId(x);
  const Tensor& xv = Val(x.id);
  if (xv.ndim() != 4) {
    Throw(ErrorCode::kShapeMismatch,
          "maxpool2d: expected [batch,ch,H,W], got " +
              ShapeToString(xv.shape()));
  }
  const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  if (ph < 1 || pw < 1 || ph > H || pw > W) {
    Throw(ErrorCode::kInvalidArgument,
          "maxpool2d: pool " + std::to_string(ph) + "x" + std::to_string(pw) +
              " does not fit input " + std::to_string(H) + "x" +
              std::to_string(W));
  }
  const int OH = H / ph, OW = W / pw;
  Tensor y({B, C, OH, OW});
  std::vector<int64_t> argmax(static_cast<size_t>(B) * C * OH * OW);
  int64_t oi = 0;
  for (int bb = 0; bb < B; ++bb)
    for (int c = 0; c < C; ++c) {
      const double* plane =
          xv.data() + (static_cast<int64_t>(bb) * C + c) * H * W;
      const int64_t base = (static_cast<int64_t>(bb) * C + c) * H * W;
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          double best = plane[static_cast<int64_t>(oh) * ph * W + ow * pw];
          int64_t best_at = static_cast<int64_t>(oh) * ph * W + ow * pw;
          for (int dy = 0; dy < ph; ++dy)
            for (int dx = 0; dx < pw; ++dx) {
              const int64_t at =
                  (static_cast<int64_t>(oh) * ph + dy) * W + ow * pw + dx;
              if (plane[at] > best) {
                best = plane[at];
                best_at = at;
              }
            }
          y[oi] = best;
          argmax[oi] = base + best_at;
          ++oi;
        }
    }
  Var v = Emit("maxpool2d", std::move(y), nullptr);
  const int xid = x.id, oid = v.id;
  nodes_[oid].back = [this, xid, oid, argmax = std::move(argmax)]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& gx = GradRef(xid);
    for (int64_t i = 0; i < g.numel(); ++i) gx[argmax[i]] += g[i];
  };
  return v;
}

Var Tape::conv1d(Var x, Var k, Var b, int stride) {
  CheckId(x);
  CheckId(k);
  CheckId(b);
  const Tensor& xv = Val(x.id);
  const Tensor& kv = Val(k.id);
  const Tensor& bv = Val(b.id);
  if (xv.ndim() != 3 || kv.ndim() != 3 || bv.ndim() != 1 ||
      xv.dim(1) != kv.dim(1) || bv.dim(0) != kv.dim(0)) {
    Throw(ErrorCode::kShapeMismatch,
          "conv1d: input " + ShapeToString(xv.shape()) + ", kernel " +
              ShapeToString(kv.shape()) + ", bias " +
              ShapeToString(bv.shape()));
  }
  if (stride < 1) {
    Throw(ErrorCode::kInvalidArgument, "conv1d: stride must be >= 1");
  }
  const int B = xv.dim(0), C = xv.dim(1), T = xv.dim(2);
  const int F = kv.dim(0), kt = kv.dim(2);
  if (T < kt) {
    Throw(ErrorCode::kInvalidArgument,
          "conv1d: input length " + std::to_string(T) +
              " shorter than kernel " + std::to_string(kt));
  }
  const int Tp = (T + stride - 1) / stride;
  const int pad_total = std::max(0, (Tp - 1) * stride + kt - T);
  const int pad_l = pad_total / 2;
  const int64_t rows = static_cast<int64_t>(B) * Tp;
  const int colw = C * kt;

  Tensor cols({static_cast<int>(rows), colw});
  {
    double* cp = cols.data();
    for (int bb = 0; bb < B; ++bb)
      for (int tp = 0; tp < Tp; ++tp)
        for (int c = 0; c < C; ++c) {
          const double* line = xv.data() + (static_cast<int64_t>(bb) * C + c) * T;
          for (int dk = 0; dk < kt; ++dk) {
            const int t = tp * stride + dk - pad_l;
            *cp++ = (t >= 0 && t < T) ? line[t] : 0.0;
          }
        }
  }

  Tensor out_rows({static_cast<int>(rows), F});
  GemmNT(static_cast<int>(rows), F, colw, cols.data(), kv.data(),
         out_rows.data(), false);
  for (int64_t r = 0; r < rows; ++r)
    for (int f = 0; f < F; ++f) out_rows[r * F + f] += bv[f];

  Tensor y({B, F, Tp});
  for (int bb = 0; bb < B; ++bb)
    for (int tp = 0; tp < Tp; ++tp)
      for (int f = 0; f < F; ++f)
        y[(static_cast<int64_t>(bb) * F + f) * Tp + tp] =
            out_rows[(static_cast<int64_t>(bb) * Tp + tp) * F + f];

  Var v = Emit("conv1d", std::move(y), nullptr);
  const int xid = x.id, kid = k.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, xid, kid, bid, oid, B, C, T, F, kt, Tp, pad_l,
                      stride, rows, colw, cols = std::move(cols)]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor gperm({static_cast<int>(rows), F});
    for (int bb = 0; bb < B; ++bb)
      for (int tp = 0; tp < Tp; ++tp)
        for (int f = 0; f < F; ++f)
          gperm[(static_cast<int64_t>(bb) * Tp + tp) * F + f] =
              g[(static_cast<int64_t>(bb) * F + f) * Tp + tp];
    Tensor& gb = GradRef(bid);
    for (int64_t r = 0; r < rows; ++r)
      for (int f = 0; f < F; ++f) gb[f] += gperm[r * F + f];
    GemmTN(F, colw, static_cast<int>(rows), gperm.data(), cols.data(),
           GradRef(kid).data(), true);
    Tensor gcols({static_cast<int>(rows), colw});
    GemmNN(static_cast<int>(rows), colw, F, gperm.data(), Val(kid).data(),
           gcols.data(), false);
    Tensor& gx = GradRef(xid);
    const double* cp = gcols.data();
    for (int bb = 0; bb < B; ++bb)
      for (int tp = 0; tp < Tp; ++tp)
        for (int c = 0; c < C; ++c) {
          double* line = gx.data() + (static_cast<int64_t>(bb) * C + c) * T;
          for (int dk = 0; dk < kt; ++dk) {
            const int t = tp * stride + dk - pad_l;
            if (t >= 0 && t < T) line[t] += *cp;
            ++cp;
          }
        }
  };
  return v;
}

Var Tape::conv1d_transpose(Var x, Var k, Var b, int stride) {
  CheckId(x);
  CheckId(k);
  CheckId(b);
  const Tensor& xv = Val(x.id);
  const Tensor& kv = Val(k.id);
  const Tensor& bv = Val(b.id);
  if (xv.ndim() != 3 || kv.ndim() != 3 || bv.ndim() != 1 ||
      xv.dim(1) != kv.dim(0) || bv.dim(0) != kv.dim(1)) {
    Throw(ErrorCode::kShapeMismatch,
          "conv1d_transpose: input " + ShapeToString(xv.shape()) +
              ", kernel " + ShapeToString(kv.shape()) + ", bias " +
              ShapeToString(bv.shape()));
  }
  if (stride < 1) {
    Throw(ErrorCode::kInvalidArgument, "conv1d_transpose: stride must be >= 1");
  }
  const int B = xv.dim(0), C = xv.dim(1), T = xv.dim(2);
  const int F = kv.dim(1), kt = kv.dim(2);
  if (kt < stride) {
    Throw(ErrorCode::kInvalidArgument,
          "conv1d_transpose: kernel length " + std::to_string(kt) +
              " shorter than stride " + std::to_string(stride));
  }
  const int out_len = stride * T;
  const int crop_l = (kt - stride) / 2;
  const int64_t rows = static_cast<int64_t>(B) * T;
  const int colw = F * kt;

  Tensor in_perm({static_cast<int>(rows), C});
  for (int bb = 0; bb < B; ++bb)
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < C; ++c)
        in_perm[(static_cast<int64_t>(bb) * T + t) * C + c] =
            xv[(static_cast<int64_t>(bb) * C + c) * T + t];

  Tensor out_cols({static_cast<int>(rows), colw});
  GemmNN(static_cast<int>(rows), colw, C, in_perm.data(), kv.data(),
         out_cols.data(), false);

  Tensor y = Tensor::Zeros({B, F, out_len});
  for (int bb = 0; bb < B; ++bb)
    for (int t = 0; t < T; ++t) {
      const double* row =
          out_cols.data() + (static_cast<int64_t>(bb) * T + t) * colw;
      for (int f = 0; f < F; ++f) {
        double* line = y.data() + (static_cast<int64_t>(bb) * F + f) * out_len;
        for (int dk = 0; dk < kt; ++dk) {
          const int pos = t * stride + dk - crop_l;
          if (pos >= 0 && pos < out_len) line[pos] += row[f * kt + dk];
        }
      }
    }
  for (int bb = 0; bb < B; ++bb)
    for (int f = 0; f < F; ++f) {
      double* line = y.data() + (static_cast<int64_t>(bb) * F + f) * out_len;
      for (int pos = 0; pos < out_len; ++pos) line[pos] += bv[f];
    }

  Var v = Emit("conv1d_transpose", std::move(y), nullptr);
  const int xid = x.id, kid = k.id, bid = b.id, oid = v.id;
  nodes_[oid].back = [this, xid, kid, bid, oid, B, C, T, F, kt, out_len,
                      crop_l, stride, rows, colw,
                      in_perm = std::move(in_perm)]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& gb = GradRef(bid);
    for (int bb = 0; bb < B; ++bb)
      for (int f = 0; f < F; ++f) {
        const double* line =
            g.data() + (static_cast<int64_t>(bb) * F + f) * out_len;
        for (int pos = 0; pos < out_len; ++pos) gb[f] += line[pos];
      }
    Tensor gcols = Tensor::Zeros({static_cast<int>(rows), colw});
    for (int bb = 0; bb < B; ++bb)
      for (int t = 0; t < T; ++t) {
        double* row =
            gcols.data() + (static_cast<int64_t>(bb) * T + t) * colw;
        for (int f = 0; f < F; ++f) {
          const double* line =
              g.data() + (static_cast<int64_t>(bb) * F + f) * out_len;
          for (int dk = 0; dk < kt; ++dk) {
            const int pos = t * stride + dk - crop_l;
            if (pos >= 0 && pos < out_len) row[f * kt + dk] = line[pos];
          }
        }
      }
    GemmTN(C, colw, static_cast<int>(rows), in_perm.data(), gcols.data(),
           GradRef(kid).data(), true);
    Tensor gin({static_cast<int>(rows), C});
    GemmNT(static_cast<int>(rows), C, colw, gcols.data(), Val(kid).data(),
           gin.data(), false);
    Tensor& gx = GradRef(xid);
    for (int bb = 0; bb < B; ++bb)
      for (int t = 0; t < T; ++t)
        for (int c = 0; c < C; ++c)
          gx[(static_cast<int64_t>(bb) * C + c) * T + t] +=
              gin[(static_cast<int64_t>(bb) * T + t) * C + c];
  };
  return v;
}

Var Tape::dropout(Var a, double drop_prob, Rng& rng) {
  CheckId(a);
  if (drop_prob < 0.0 || drop_prob >= 1.0) {
    Throw(ErrorCode::kInvalidArgument,
          "dropout: drop_prob must be in [0,1), got " +
              std::to_string(drop_prob));
  }
  if (!training_ || drop_prob == 0.0) return a;
  const Tensor& av = Val(a.id);
  Tensor mask(av.shape());
  const double keep_scale = 1.0 / (1.0 - drop_prob);
  for (int64_t i = 0; i < mask.numel(); ++i)
    mask[i] = rng.NextDouble() < drop_prob ? 0.0 : keep_scale;
  Tensor out(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] * mask[i];
  Var v = Emit("dropout", std::move(out), nullptr);
  const int aid = a.id, oid = v.id;
  nodes_[oid].back = [this, aid, oid, mask = std::move(mask)]() {
    const Tensor& g = nodes_[oid].grad;
    Tensor& ga = GradRef(aid);
    for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * mask[i];
  };
  return v;
}

// --------------------------------------------------------------------- losses

Tape::XentResult Tape::softmax_xent(Var logits, const std::vector<int>& labels) {
  CheckId(logits);
  const Tensor& lv = Val(logits.id);
  Require2d("softmax_xent", lv);
  const int B = lv.dim(0), K = lv.dim(1);
  if (K < 2) {
    Throw(ErrorCode::kInvalidArgument, "softmax_xent: need >= 2 classes");
  }
  if (static_cast<int>(labels.size()) != B) {
    Throw(ErrorCode::kShapeMismatch,
          "softmax_xent: " + std::to_string(labels.size()) + " labels for " +
              std::to_string(B) + " rows");
  }
  for (int i = 0; i < B; ++i) {
    if (labels[i] < 0 || labels[i] >= K) {
      Throw(ErrorCode::kInvalidArgument,
            "softmax_xent: label " + std::to_string(labels[i]) +
                " out of range for " + std::to_string(K) + " classes at row " +
                std::to_string(i));
    }
  }
  Tensor probs = SoftmaxRows(lv);
  double loss = 0.0;
  for (int i = 0; i < B; ++i) {
    loss -= std::log(std::max(probs[static_cast<int64_t>(i) * K + labels[i]],
                              1e-300));
  }
  loss /= B;
  Var v = Emit("softmax_xent", Tensor({1}, {loss}), nullptr);
  const int lid = logits.id, oid = v.id;
  nodes_[oid].back = [this, lid, oid, labels, B, K, probs]() {
    const double gs = nodes_[oid].grad[0];
    Tensor& gl = GradRef(lid);
    const double inv_b = 1.0 / static_cast<double>(B);
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < K; ++j) {
        double d = probs[static_cast<int64_t>(i) * K + j];
        if (j == labels[i]) d -= 1.0;
        gl[static_cast<int64_t>(i) * K + j] += gs * d * inv_b;
      }
  };
  return XentResult{v, std::move(probs)};
}

Var Tape::l1_loss(Var pred, Var target) {
  CheckId(pred);
  CheckId(target);
  const Tensor& pv = Val(pred.id);
  const Tensor& tv = Val(target.id);
  RequireSameShape("l1_loss", pv, tv);
  double loss = 0.0;
  for (int64_t i = 0; i < pv.numel(); ++i) loss += std::abs(pv[i] - tv[i]);
  loss /= static_cast<double>(pv.numel());
  Var v = Emit("l1_loss", Tensor({1}, {loss}), nullptr);
  const int pid = pred.id, tid = target.id, oid = v.id;
  nodes_[oid].back = [this, pid, tid, oid]() {
    const double gs = nodes_[oid].grad[0];
    const Tensor& pv = Val(pid);
    const Tensor& tv = Val(tid);
    Tensor& gp = GradRef(pid);
    Tensor& gt = GradRef(tid);
    const double inv = gs / static_cast<double>(pv.numel());
    for (int64_t i = 0; i < pv.numel(); ++i) {
      const double d = pv[i] - tv[i];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      gp[i] += s * inv;
      gt[i] -= s * inv;
    }
  };
  return v;
}

void Tape::backward(Var loss) {
  CheckId(loss);
  if (ran_backward_) {
    Throw(ErrorCode::kInvalidArgument, "backward already ran on this tape");
  }
  ran_backward_ = true;
  if (Val(loss.id).numel() != 1) {
    Throw(ErrorCode::kInvalidArgument,
          "backward root must be scalar, got " +
              ShapeToString(Val(loss.id).shape()));
  }
  GradRef(loss.id)[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad.empty() && n.back) n.back();
  }
  for (Node& n : nodes_) {
    if (n.bound && !n.grad.empty()) {
      double* g = n.bound->grad.data();
      for (int64_t i = 0; i < n.grad.numel(); ++i) g[i] += n.grad[i];
    }
  }
}

Tensor SoftmaxRows(const Tensor& logits) {
  if (logits.ndim() != 2) {
    Throw(ErrorCode::kShapeMismatch,
          "softmax: expected a matrix, got " + ShapeToString(logits.shape()));
  }
  const int m = logits.dim(0), n = logits.dim(1);
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    const double* row = logits.data() + static_cast<int64_t>(i) * n;
    double* orow = out.data() + static_cast<int64_t>(i) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] /= sum;
  }
  return out;
}

}  // namespace voxid::nn
