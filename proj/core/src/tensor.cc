// voxid/tensor.cc

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

#include "voxid/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "voxid/error.h"

namespace voxid::nn {

std::string ShapeToString(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << s[i];
  }
  os << "]";
  return os.str();
}

int64_t ShapeNumel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d < 0)
      Throw(ErrorCode::kInvalidArgument,
            "negative dimension in shape " + ShapeToString(s));
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(ShapeNumel(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeNumel(shape_) != static_cast<int64_t>(data_.size()))
    Throw(ErrorCode::kShapeMismatch,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match shape " + ShapeToString(shape_));
}

Tensor Tensor::Full(Shape shape, double value) {
  Tensor t(std::move(shape));
  t.Fill(value);
  return t;
}

Tensor Tensor::UniformInit(Shape shape, double lo, double hi, Rng& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.Uniform(lo, hi);
  return t;
}

Tensor Tensor::GlorotInit(Shape shape, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  return UniformInit(std::move(shape), -limit, limit, rng);
}

void Tensor::Fill(double value) {
  for (auto& x : data_) x = value;
}

bool Tensor::AllFinite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

Tensor Tensor::Reshaped(Shape new_shape) const {
  if (ShapeNumel(new_shape) != numel())
    Throw(ErrorCode::kShapeMismatch,
          "cannot reshape " + ShapeToString(shape_) + " to " +
              ShapeToString(new_shape));
  return Tensor(std::move(new_shape), data_);
}

// Plain blocked kernels; the i-k-j ordering keeps the inner loop contiguous
// so the compiler vectorizes it.
void GemmNN(int m, int n, int k, const double* a, const double* b, double* c,
            bool accumulate) {
  if (!accumulate)
    for (int64_t i = 0; i < static_cast<int64_t>(m) * n; ++i) c[i] = 0.0;
  constexpr int kBlock = 64;
  for (int i0 = 0; i0 < m; i0 += kBlock) {
    const int i1 = std::min(m, i0 + kBlock);
    for (int k0 = 0; k0 < k; k0 += kBlock) {
      const int k1 = std::min(k, k0 + kBlock);
      for (int i = i0; i < i1; ++i) {
        double* ci = c + static_cast<int64_t>(i) * n;
        const double* ai = a + static_cast<int64_t>(i) * k;
        for (int kk = k0; kk < k1; ++kk) {
          const double av = ai[kk];
          const double* bk = b + static_cast<int64_t>(kk) * n;
          for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
      }
    }
  }
}

void GemmTN(int m, int n, int k, const double* a, const double* b, double* c,
            bool accumulate) {
  if (!accumulate)
    for (int64_t i = 0; i < static_cast<int64_t>(m) * n; ++i) c[i] = 0.0;
  // A is k x m; stream rows of A and B together
  for (int kk = 0; kk < k; ++kk) {
    const double* ak = a + static_cast<int64_t>(kk) * m;
    const double* bk = b + static_cast<int64_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      const double av = ak[i];
      double* ci = c + static_cast<int64_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
    }
  }
}

void GemmNT(int m, int n, int k, const double* a, const double* b, double* c,
            bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<int64_t>(j) * k;
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

}  // namespace voxid::nn
