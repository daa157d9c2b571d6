// voxid/tensor.h

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

#ifndef VOXID_TENSOR_H_
#define VOXID_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "voxid/rng.h"

namespace voxid::nn {

using Shape = std::vector<int>;

std::string ShapeToString(const Shape& s);
int64_t ShapeNumel(const Shape& s);

// Dense row-major n-dimensional array of doubles.  Value-semantic; all
// entries are expected to stay finite (ops that could break that check).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor Full(Shape shape, double value);
  static Tensor UniformInit(Shape shape, double lo, double hi, Rng& rng);
  // Glorot/Xavier uniform: +-sqrt(6 / (fan_in + fan_out))
  static Tensor GlorotInit(Shape shape, int fan_in, int fan_out, Rng& rng);

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[i]; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](int64_t i) { return data_[i]; }
  double operator[](int64_t i) const { return data_[i]; }

  // 2-D and 3-D accessors for tests and small code paths
  double& At(int i, int j) { return data_[static_cast<int64_t>(i) * shape_[1] + j]; }
  double At(int i, int j) const { return data_[static_cast<int64_t>(i) * shape_[1] + j]; }

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }
  void Fill(double value);
  bool AllFinite() const;
  Tensor Reshaped(Shape new_shape) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// C[m x n] = A[m x k] * B[k x n], row-major; accumulate when beta is 1.
void GemmNN(int m, int n, int k, const double* a, const double* b, double* c,
            bool accumulate);
// C[m x n] = A^T[k x m] * B[k x n]
void GemmTN(int m, int n, int k, const double* a, const double* b, double* c,
            bool accumulate);
// C[m x n] = A[m x k] * B^T[n x k]
void GemmNT(int m, int n, int k, const double* a, const double* b, double* c,
            bool accumulate);

}  // namespace voxid::nn

#endif  // VOXID_TENSOR_H_
