// src/optimizer.cc

// Copyright 2026  The NPC Embed Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "npc/optimizer.h"

#include <cmath>
#include <string>

#include "npc/error.h"

namespace npc {

RmsPropState MakeRmsPropState(const std::vector<Tensor*>& params) {
  RmsPropState state;
  state.accumulators.reserve(params.size());
  for (const Tensor* p : params) {
    state.accumulators.emplace_back(p->shape());
  }
  return state;
}

void RmsPropStep(const std::vector<Tensor*>& params,
                 const std::vector<const Tensor*>& grads, RmsPropState* state,
                 const RmsPropConfig& config) {
  if (params.size() != grads.size() ||
      params.size() != state->accumulators.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "optimizer parameter/gradient/state counts differ");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& param = *params[t];
    const Tensor& grad = *grads[t];
    Tensor& accum = state->accumulators[t];
    if (!param.SameShape(grad) || !param.SameShape(accum)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "optimizer tensor " + std::to_string(t) +
                      " shape disagreement");
    }
    double* p = param.data();
    const double* g = grad.data();
    double* a = accum.data();
    std::size_t n = param.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(g[i])) {
        throw Error(ErrorCode::kNonFiniteGradient,
                    "non-finite gradient in tensor " + std::to_string(t));
      }
      double augmented = g[i] + config.weight_decay * p[i];
      a[i] = config.decay_rate * a[i] +
             (1.0 - config.decay_rate) * augmented * augmented;
      p[i] -= config.lr * augmented / std::sqrt(a[i] + config.eps);
    }
  }
  ++state->step;
}

}  // namespace npc
