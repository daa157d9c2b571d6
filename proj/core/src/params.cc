// voxid/params.cc

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

#include "voxid/params.h"

#include <cmath>

#include "voxid/error.h"

namespace voxid::nn {

Parameter& ParameterSet::Create(const std::string& name, Tensor init) {
  if (index_.count(name)) {
    Throw(ErrorCode::kInvalidArgument, "duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor::Zeros(init.shape());
  p->m = Tensor::Zeros(init.shape());
  p->v = Tensor::Zeros(init.shape());
  p->value = std::move(init);
  index_[name] = static_cast<int>(params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterSet::Get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    Throw(ErrorCode::kInvalidArgument, "unknown parameter: " + name);
  }
  return *params_[it->second];
}

const Parameter& ParameterSet::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    Throw(ErrorCode::kInvalidArgument, "unknown parameter: " + name);
  }
  return *params_[it->second];
}

bool ParameterSet::Has(const std::string& name) const {
  return index_.count(name) > 0;
}

int64_t ParameterSet::TotalElements() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p->value.numel();
  return total;
}

void ParameterSet::ZeroGrads() {
  for (auto& p : params_) p->grad.Fill(0.0);
}

void AdamStep(ParameterSet& params, AdamConfig& cfg) {
  if (cfg.learning_rate <= 0.0) {
    Throw(ErrorCode::kInvalidArgument, "Adam learning rate must be positive");
  }
  // All-or-nothing: validate every gradient before mutating anything.
  for (int i = 0; i < params.size(); ++i) {
    if (!params.at(i).grad.AllFinite()) {
      Throw(ErrorCode::kNonFinite,
            "non-finite gradient for parameter " + params.at(i).name);
    }
  }
  cfg.step_count += 1;
  const double t = static_cast<double>(cfg.step_count);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (int i = 0; i < params.size(); ++i) {
    Parameter& p = params.at(i);
    double* w = p.value.data();
    double* g = p.grad.data();
    double* m = p.m.data();
    double* v = p.v.data();
    const int64_t n = p.value.numel();
    for (int64_t j = 0; j < n; ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
    p.grad.Fill(0.0);
  }
}

}  // namespace voxid::nn
