// include/npc/model.h

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

#ifndef NPC_MODEL_H_
#define NPC_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "npc/layers.h"
#include "npc/tensor.h"

namespace npc {

enum class LossKind { kCrossEntropy, kCosine };

struct ConvLayerSpec {
  std::size_t kernel = 0;
  std::size_t channels = 0;
};

// The siamese trunk: conv→BN→LeakyReLU blocks with a 2×2 pool after every
// second conv, flatten, then a dense layer to the embedding.  The exported
// embedding is always the dense pre-activation output; when
// head_batchnorm is set the training graph adds BN→LeakyReLU after the
// dense layer before the distance computation.
struct ArchitectureSpec {
  std::size_t input_frames = 100;  // window length d
  std::size_t input_coeffs = 40;   // feature dimension m
  // Kernel sizes shrink 7, 5, 4, 3.  Channel widths are a recorded design
  // choice: 16 in the first block, then 32, landing the total learnable
  // parameter count at exactly 1,680,482.
  std::vector<ConvLayerSpec> convs = {{7, 16}, {5, 32}, {4, 32}, {3, 32}};
  std::size_t embedding_dim = 512;
  bool head_batchnorm = true;
};

struct LayerShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

// Shapes after each conv and each pool, in order.  Throws ShapeMismatch if
// a kernel outgrows its input or a pooled extent is odd.
std::vector<LayerShape> ActivationChain(const ArchitectureSpec& spec);

std::size_t FlattenLength(const ArchitectureSpec& spec);

// Learnable parameters only (running stats excluded).
std::size_t CountParameters(const ArchitectureSpec& spec);

// True when a pool follows conv layer `index` (after every second conv).
bool PoolAfterConv(std::size_t index);

struct ConvBlockParams {
  Tensor kernels;  // Co×Ci×k×k
  Tensor bias;     // Co
  Tensor gamma, beta, running_mean, running_var;  // Co each
};

struct ModelParams {
  ArchitectureSpec spec;
  LossKind trained_loss = LossKind::kCrossEntropy;
  std::vector<ConvBlockParams> conv;
  Tensor embed_w, embed_b;  // D×flatten, D
  Tensor embed_gamma, embed_beta, embed_rmean, embed_rvar;  // D each
  Tensor head_w, head_b;  // 2×D, 2
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

// Canonical tensor orders.  Learnable excludes running stats; All includes
// them (checkpoint order).
std::vector<NamedTensor> LearnableTensors(ModelParams* params);
std::vector<NamedTensor> AllTensors(ModelParams* params);

struct ConvBlockGrads {
  Tensor kernels, bias, gamma, beta;
};

struct ModelGrads {
  std::vector<ConvBlockGrads> conv;
  Tensor embed_w, embed_b, embed_gamma, embed_beta;
  Tensor head_w, head_b;
  // Mirrors the spec flag so GradTensors matches LearnableTensors.
  bool head_batchnorm = true;
};

ModelGrads MakeZeroGrads(const ModelParams& params);

// Same order as LearnableTensors.
std::vector<Tensor*> GradTensors(ModelGrads* grads);

// Deterministic init: conv/dense weights uniform in ±1/√fan_in, conv and
// dense biases zero, gamma 1, beta 0, running stats (0, 1).  The classifier
// head starts at exactly zero: the cross-entropy gradients of the two rows
// are then exact negations of each other, which makes the learned rows
// mirror (w1 ≈ −w2, b1 ≈ −b2) from the first step onward.
ModelParams BuildModel(const ArchitectureSpec& spec, std::uint64_t seed);

struct TrunkCacheStage {
  BatchNormCache bn;
  Tensor act_out;
  Tensor pool_out;
  std::vector<std::uint32_t> pool_argmax;
  std::vector<std::size_t> pre_pool_shape;
  bool pooled = false;
};

struct TrunkCache {
  Tensor input;  // B×1×d×m
  std::vector<TrunkCacheStage> stages;
  Tensor flat;       // B×flatten
  Tensor embedding;  // B×D pre-activation
  BatchNormCache embed_bn;
  Tensor embed_act;  // B×D post BN+LReLU (only when head_batchnorm)
};

struct TrunkOutputs {
  Tensor embedding;  // B×D dense pre-activation (the exported embedding)
  Tensor graph;      // training-graph output fed to the distance layer
};

// windows: B×1×d×m.  train=true uses batch statistics, updates running
// stats, and fills `cache` for the backward pass; train=false uses running
// stats and leaves `cache` untouched (may be null).
TrunkOutputs TrunkForward(const Tensor& windows, ModelParams* params,
                          bool train, TrunkCache* cache);

// grad_graph: gradient w.r.t. the training-graph output.  Accumulates into
// `grads` and returns nothing (input gradients are not needed).
void TrunkBackward(const Tensor& grad_graph, const TrunkCache& cache,
                   const ModelParams& params, ModelGrads* grads);

// Elementwise |e1 − e2|.
std::vector<double> L1Distance(const std::vector<double>& e1,
                               const std::vector<double>& e2);

struct PairLogits {
  double g1 = 0.0, g2 = 0.0;  // genuine / impostor logits
  double p1 = 0.0, p2 = 0.0;  // softmax probabilities, p1 + p2 == 1
};

// g_i = Σ_k w_{i,k}·L_k + b_i, probabilities via two-way softmax computed
// in shifted form.
PairLogits ClassifyPair(const std::vector<double>& distance,
                        const ModelParams& params);

// −(1−y)·log p1 − y·log p2 from probabilities.
double CrossEntropyLoss(double p1, double p2, int label);

// Same value computed stably from logits in log-sum-exp form.
double CrossEntropyFromLogits(double g1, double g2, int label);

// 1 − C for genuine (y=0); C for impostor (y=1), or max(0, C) when clamp
// is set.  C is the cosine of the two embeddings.
double CosineLoss(const std::vector<double>& e1, const std::vector<double>& e2,
                  int label, bool clamp);

// Batch loss over training-graph outputs laid out as [all x1 | all x2]
// (2B×D).  Fills grad_graph (same shape) with d(mean loss)/d(graph) and,
// for cross-entropy, accumulates head gradients.  `correct` counts the
// decision rule: argmax(p1, p2) for cross-entropy, C > 0.5 ⇒ genuine for
// cosine.  Pass null grads to evaluate without gradients.
struct BatchLossResult {
  double mean_loss = 0.0;
  std::size_t correct = 0;
  Tensor grad_graph;
};

BatchLossResult CrossEntropyBatch(const Tensor& graph,
                                  const std::vector<int>& labels,
                                  const ModelParams& params, ModelGrads* grads);

BatchLossResult CosineBatch(const Tensor& graph, const std::vector<int>& labels,
                            bool clamp, ModelGrads* grads);

struct MirrorStats {
  double mean_abs_sum = 0.0;  // mean over k of |w1k + w2k|
  double std_abs_sum = 0.0;
  double cosine = 0.0;        // cosine(w1, w2)
  double b1 = 0.0, b2 = 0.0;
};

// Throws WrongLossKind unless the params were trained with cross-entropy.
MirrorStats WeightMirrorStats(const ModelParams& params);

}  // namespace npc

#endif  // NPC_MODEL_H_
