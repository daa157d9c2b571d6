// voxid/params.h

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

#ifndef VOXID_PARAMS_H_
#define VOXID_PARAMS_H_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "voxid/tensor.h"

namespace voxid::nn {

// One trainable tensor with its gradient and Adam moment buffers.  The
// gradient and moments always share the value's shape.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
};

// Ordered, uniquely named parameter collection.  Insertion order is the
// serialization order of the model bundle, so it must be deterministic.
class ParameterSet {
 public:
  Parameter& Create(const std::string& name, Tensor init);
  Parameter& Get(const std::string& name);
  const Parameter& Get(const std::string& name) const;
  bool Has(const std::string& name) const;

  int size() const { return static_cast<int>(params_.size()); }
  Parameter& at(int i) { return *params_[i]; }
  const Parameter& at(int i) const { return *params_[i]; }

  int64_t TotalElements() const;
  void ZeroGrads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, int> index_;
};

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step_count = 0;
};

// Per-epoch mean training loss, recorded by every stage trainer.
struct TrainTrace {
  std::vector<double> epoch_loss;
};

// One Adam update with bias correction.  Increments cfg.step_count, applies
// the update to every parameter, then zeroes all gradients.  A NaN/Inf in
// any gradient aborts before any parameter is touched.
void AdamStep(ParameterSet& params, AdamConfig& cfg);

}  // namespace voxid::nn

#endif  // VOXID_PARAMS_H_
