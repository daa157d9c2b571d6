// voxid/gradcheck.cc

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

#include "voxid/gradcheck.h"

#include <cmath>
#include <vector>

#include "voxid/error.h"

namespace voxid::nn {

namespace {

double EvalLoss(const GraphBuilder& build) {
  Tape tape(/*training=*/true);
  Var loss = build(tape);
  const Tensor& v = tape.value(loss);
  if (v.numel() != 1) {
    Throw(ErrorCode::kInvalidArgument,
          "grad check requires a scalar loss, got " +
              ShapeToString(v.shape()));
  }
  return v[0];
}

}  // namespace

GradCheckReport CheckGradients(const GraphBuilder& build, ParameterSet& params,
                               double h) {
  params.ZeroGrads();
  std::vector<Tensor> analytic;
  {
    Tape tape(/*training=*/true);
    Var loss = build(tape);
    tape.backward(loss);
  }
  analytic.reserve(params.size());
  for (int i = 0; i < params.size(); ++i) analytic.push_back(params.at(i).grad);
  params.ZeroGrads();

  GradCheckReport report;
  for (int i = 0; i < params.size(); ++i) {
    Parameter& p = params.at(i);
    for (int64_t j = 0; j < p.value.numel(); ++j) {
      const double orig = p.value[j];
      p.value[j] = orig + h;
      const double up = EvalLoss(build);
      p.value[j] = orig - h;
      const double down = EvalLoss(build);
      p.value[j] = orig;
      const double num = (up - down) / (2.0 * h);
      const double ana = analytic[i][j];
      const double denom =
          std::max(std::max(std::abs(num), std::abs(ana)), 1e-3);
      const double rel = std::abs(num - ana) / denom;
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = j;
        report.analytic = ana;
        report.numeric = num;
      }
    }
  }
  return report;
}

}  // namespace voxid::nn
