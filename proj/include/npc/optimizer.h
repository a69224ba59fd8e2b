// include/npc/optimizer.h

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

#ifndef NPC_OPTIMIZER_H_
#define NPC_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "npc/tensor.h"

namespace npc {

struct RmsPropConfig {
  double lr = 1e-4;
  double decay_rate = 0.99;
  double eps = 1e-8;
  double weight_decay = 1e-6;
};

struct RmsPropState {
  std::vector<Tensor> accumulators;  // squared-gradient running averages
  std::uint64_t step = 0;
};

// Creates zero accumulators shaped like the given parameters.
RmsPropState MakeRmsPropState(const std::vector<Tensor*>& params);

// Weight decay augments the gradient before accumulation:
//   g <- grad + weight_decay·param
//   a <- decay·a + (1−decay)·g²
//   param <- param − lr·g/√(a + eps)
void RmsPropStep(const std::vector<Tensor*>& params,
                 const std::vector<const Tensor*>& grads, RmsPropState* state,
                 const RmsPropConfig& config);

}  // namespace npc

#endif  // NPC_OPTIMIZER_H_
