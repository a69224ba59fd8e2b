// include/npc/layers.h

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

#ifndef NPC_LAYERS_H_
#define NPC_LAYERS_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "npc/tensor.h"

namespace npc {

// Every op takes batched inputs (leading batch axis) and checks its output
// for NaN/Inf, throwing NonFiniteValue.  All backward passes are exact
// hand-derived gradients of the forward maps; internal parallelism assigns
// each output element to exactly one worker, so results are bitwise
// identical for any worker count.

// Valid (no padding) stride-1 convolution.
// input B×Ci×H×W, kernels Co×Ci×kh×kw, bias Co -> B×Co×(H-kh+1)×(W-kw+1).
Tensor Conv2dForward(const Tensor& input, const Tensor& kernels,
                     const Tensor& bias);

// Any of the gradient outputs may be null to skip its computation.
void Conv2dBackward(const Tensor& input, const Tensor& kernels,
                    const Tensor& grad_out, Tensor* grad_input,
                    Tensor* grad_kernels, Tensor* grad_bias);

// Non-overlapping 2×2 max pooling, stride 2; ties broken toward the
// smallest flat index.  input B×C×H×W with even H, W.
struct PoolResult {
  Tensor output;
  std::vector<std::uint32_t> argmax;  // flat offset into each input plane
};

PoolResult MaxPool2x2Forward(const Tensor& input);
Tensor MaxPool2x2Backward(const std::vector<std::size_t>& input_shape,
                          const std::vector<std::uint32_t>& argmax,
                          const Tensor& grad_out);

// Batch normalization over the feature axis: rank-2 input B×F normalizes
// each of the F features over the batch; rank-4 input B×C×H×W pools
// statistics per channel over batch and spatial positions.
struct BatchNormCache {
  Tensor xhat;
  std::vector<double> inv_std;  // one per feature/channel
};

Tensor BatchNormForward(const Tensor& input, const Tensor& gamma,
                        const Tensor& beta, bool train, Tensor* running_mean,
                        Tensor* running_var, double momentum, double eps,
                        BatchNormCache* cache);

Tensor BatchNormBackward(const BatchNormCache& cache, const Tensor& gamma,
                         const Tensor& grad_out, Tensor* grad_gamma,
                         Tensor* grad_beta);

constexpr double kLeakySlope = 0.01;

Tensor LeakyReluForward(const Tensor& input, double slope = kLeakySlope);

// Backward recovers the branch from the forward output: output > 0 iff
// input > 0, and output == 0 uses the slope subgradient.
Tensor LeakyReluBackward(const Tensor& output, const Tensor& grad_out,
                         double slope = kLeakySlope);

// input B×In, weights Out×In, bias Out -> B×Out.
Tensor DenseForward(const Tensor& input, const Tensor& weights,
                    const Tensor& bias);
void DenseBackward(const Tensor& input, const Tensor& weights,
                   const Tensor& grad_out, Tensor* grad_input,
                   Tensor* grad_weights, Tensor* grad_bias);

// Throws NonFiniteValue naming the op if any element is NaN/Inf.
void CheckFinite(const Tensor& tensor, const char* op_name);

}  // namespace npc

#endif  // NPC_LAYERS_H_
