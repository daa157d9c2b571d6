// voxid/gradcheck.h

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

#ifndef VOXID_GRADCHECK_H_
#define VOXID_GRADCHECK_H_

#include <functional>
#include <string>

#include "voxid/params.h"
#include "voxid/tape.h"

namespace voxid::nn {

// Builds a scalar loss graph on the given tape.  Must be deterministic:
// repeated invocations see the current parameter values and nothing else
// (stochastic ops must reseed their own RNG inside the builder).
using GraphBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int64_t worst_index = -1;
  double analytic = 0.0;   // reverse-mode gradient at the worst element
  double numeric = 0.0;    // central finite difference at the worst element
  int64_t checked = 0;     // total elements compared
};

// Central finite differences (step h) for every element of every parameter
// vs the reverse-mode gradient.  Relative error per element is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
// Parameter values are restored exactly after probing.
GradCheckReport CheckGradients(const GraphBuilder& build, ParameterSet& params,
                               double h = 1e-5);

}  // namespace voxid::nn

#endif  // VOXID_GRADCHECK_H_
