// src/model.cc

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

#include "npc/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "npc/error.h"
#include "npc/rng.h"

namespace npc {

namespace {

constexpr double kBnMomentum = 0.9;
constexpr double kBnEps = 1e-5;

void ValidateSpec(const ArchitectureSpec& spec) {
  if (spec.input_frames == 0 || spec.input_coeffs == 0 ||
      spec.embedding_dim == 0 || spec.convs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "degenerate architecture spec");
  }
  for (const ConvLayerSpec& conv : spec.convs) {
    if (conv.kernel == 0 || conv.channels == 0) {
      throw Error(ErrorCode::kInvalidArgument, "degenerate conv layer spec");
    }
  }
}

}  // namespace

bool PoolAfterConv(std::size_t index) { return index % 2 == 1; }

std::vector<LayerShape> ActivationChain(const ArchitectureSpec& spec) {
  ValidateSpec(spec);
  std::vector<LayerShape> chain;
  std::size_t h = spec.input_frames, w = spec.input_coeffs;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    std::size_t k = spec.convs[i].kernel;
    if (h < k || w < k) {
      throw Error(ErrorCode::kShapeMismatch,
                  "conv kernel " + std::to_string(k) +
                      " does not fit input " + std::to_string(h) + "×" +
                      std::to_string(w));
    }
    h = h - k + 1;
    w = w - k + 1;
    chain.push_back(LayerShape{spec.convs[i].channels, h, w});
    if (PoolAfterConv(i)) {
      if (h % 2 != 0 || w % 2 != 0) {
        throw Error(ErrorCode::kOddExtent,
                    "pool input " + std::to_string(h) + "×" +
                        std::to_string(w) + " has odd extents");
      }
      h /= 2;
      w /= 2;
      chain.push_back(LayerShape{spec.convs[i].channels, h, w});
    }
  }
  return chain;
}

std::size_t FlattenLength(const ArchitectureSpec& spec) {
  LayerShape last = ActivationChain(spec).back();
  return last.channels * last.height * last.width;
}

std::size_t CountParameters(const ArchitectureSpec& spec) {
  ValidateSpec(spec);
  std::size_t count = 0;
  std::size_t in_channels = 1;
  for (const ConvLayerSpec& conv : spec.convs) {
    count += conv.channels * in_channels * conv.kernel * conv.kernel;  // kernels
    count += conv.channels;      // bias
    count += 2 * conv.channels;  // gamma, beta
    in_channels = conv.channels;
  }
  std::size_t flatten = FlattenLength(spec);
  count += spec.embedding_dim * flatten + spec.embedding_dim;  // dense
  if (spec.head_batchnorm) {
    count += 2 * spec.embedding_dim;  // embedding gamma, beta
  }
  count += 2 * spec.embedding_dim + 2;  // classifier head
  return count;
}

std::vector<NamedTensor> LearnableTensors(ModelParams* params) {
  std::vector<NamedTensor> tensors;
  for (std::size_t i = 0; i < params->conv.size(); ++i) {
    std::string prefix = "conv" + std::to_string(i) + ".";
    tensors.push_back({prefix + "kernels", &params->conv[i].kernels});
    tensors.push_back({prefix + "bias", &params->conv[i].bias});
    tensors.push_back({prefix + "gamma", &params->conv[i].gamma});
    tensors.push_back({prefix + "beta", &params->conv[i].beta});
  }
  tensors.push_back({"embed.weights", &params->embed_w});
  tensors.push_back({"embed.bias", &params->embed_b});
  if (params->spec.head_batchnorm) {
    tensors.push_back({"embed.gamma", &params->embed_gamma});
    tensors.push_back({"embed.beta", &params->embed_beta});
  }
  tensors.push_back({"head.weights", &params->head_w});
  tensors.push_back({"head.bias", &params->head_b});
  return tensors;
}

std::vector<NamedTensor> AllTensors(ModelParams* params) {
  std::vector<NamedTensor> tensors;
  for (std::size_t i = 0; i < params->conv.size(); ++i) {
    std::string prefix = "conv" + std::to_string(i) + ".";
    tensors.push_back({prefix + "kernels", &params->conv[i].kernels});
    tensors.push_back({prefix + "bias", &params->conv[i].bias});
    tensors.push_back({prefix + "gamma", &params->conv[i].gamma});
    tensors.push_back({prefix + "beta", &params->conv[i].beta});
    tensors.push_back({prefix + "running_mean", &params->conv[i].running_mean});
    tensors.push_back({prefix + "running_var", &params->conv[i].running_var});
  }
  tensors.push_back({"embed.weights", &params->embed_w});
  tensors.push_back({"embed.bias", &params->embed_b});
  tensors.push_back({"embed.gamma", &params->embed_gamma});
  tensors.push_back({"embed.beta", &params->embed_beta});
  tensors.push_back({"embed.running_mean", &params->embed_rmean});
  tensors.push_back({"embed.running_var", &params->embed_rvar});
  tensors.push_back({"head.weights", &params->head_w});
  tensors.push_back({"head.bias", &params->head_b});
  return tensors;
}

ModelGrads MakeZeroGrads(const ModelParams& params) {
  ModelGrads grads;
  grads.conv.resize(params.conv.size());
  for (std::size_t i = 0; i < params.conv.size(); ++i) {
    grads.conv[i].kernels = Tensor(params.conv[i].kernels.shape());
    grads.conv[i].bias = Tensor(params.conv[i].bias.shape());
    grads.conv[i].gamma = Tensor(params.conv[i].gamma.shape());
    grads.conv[i].beta = Tensor(params.conv[i].beta.shape());
  }
  grads.embed_w = Tensor(params.embed_w.shape());
  grads.embed_b = Tensor(params.embed_b.shape());
  grads.embed_gamma = Tensor(params.embed_gamma.shape());
  grads.embed_beta = Tensor(params.embed_beta.shape());
  grads.head_w = Tensor(params.head_w.shape());
  grads.head_b = Tensor(params.head_b.shape());
  grads.head_batchnorm = params.spec.head_batchnorm;
  return grads;
}

std::vector<Tensor*> GradTensors(ModelGrads* grads) {
  std::vector<Tensor*> tensors;
  for (ConvBlockGrads& conv : grads->conv) {
    tensors.push_back(&conv.kernels);
    tensors.push_back(&conv.bias);
    tensors.push_back(&conv.gamma);
    tensors.push_back(&conv.beta);
  }
  tensors.push_back(&grads->embed_w);
  tensors.push_back(&grads->embed_b);
  if (grads->head_batchnorm) {
    tensors.push_back(&grads->embed_gamma);
    tensors.push_back(&grads->embed_beta);
  }
  tensors.push_back(&grads->head_w);
  tensors.push_back(&grads->head_b);
  return tensors;
}

ModelParams BuildModel(const ArchitectureSpec& spec, std::uint64_t seed) {
  ValidateSpec(spec);
  ActivationChain(spec);  // validates the full shape chain
  ModelParams params;
  params.spec = spec;
  Rng rng(seed);

  auto fill_uniform = [&](Tensor* tensor, std::size_t fan_in) {
    double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    double* p = tensor->data();
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      p[i] = rng.UniformReal(-scale, scale);
    }
  };

  std::size_t in_channels = 1;
  for (const ConvLayerSpec& conv : spec.convs) {
    ConvBlockParams block;
    block.kernels =
        Tensor({conv.channels, in_channels, conv.kernel, conv.kernel});
    fill_uniform(&block.kernels, in_channels * conv.kernel * conv.kernel);
    block.bias = Tensor({conv.channels});
    block.gamma = Tensor({conv.channels});
    block.gamma.Fill(1.0);
    block.beta = Tensor({conv.channels});
    block.running_mean = Tensor({conv.channels});
    block.running_var = Tensor({conv.channels});
    block.running_var.Fill(1.0);
    params.conv.push_back(std::move(block));
    in_channels = conv.channels;
  }

  std::size_t flatten = FlattenLength(spec);
  params.embed_w = Tensor({spec.embedding_dim, flatten});
  fill_uniform(&params.embed_w, flatten);
  params.embed_b = Tensor({spec.embedding_dim});
  params.embed_gamma = Tensor({spec.embedding_dim});
  params.embed_gamma.Fill(1.0);
  params.embed_beta = Tensor({spec.embedding_dim});
  params.embed_rmean = Tensor({spec.embedding_dim});
  params.embed_rvar = Tensor({spec.embedding_dim});
  params.embed_rvar.Fill(1.0);

  // Zero-initialized head: the cross-entropy gradients of the two logit
  // rows are exact negations, so the rows stay mirrored as they grow.
  params.head_w = Tensor({2, spec.embedding_dim});
  params.head_b = Tensor({2});
  return params;
}

TrunkOutputs TrunkForward(const Tensor& windows, ModelParams* params,
                          bool train, TrunkCache* cache) {
  const ArchitectureSpec& spec = params->spec;
  if (windows.rank() != 4 || windows.dim(1) != 1 ||
      windows.dim(2) != spec.input_frames ||
      windows.dim(3) != spec.input_coeffs) {
    throw Error(ErrorCode::kShapeMismatch,
                "trunk input must be B×1×" +
                    std::to_string(spec.input_frames) + "×" +
                    std::to_string(spec.input_coeffs));
  }
  std::size_t batch = windows.dim(0);
  bool keep = train && cache != nullptr;
  if (keep) {
    cache->input = windows;
    cache->stages.clear();
    cache->stages.resize(spec.convs.size());
  }

  Tensor current = windows;
  for (std::size_t i = 0; i < spec.convs.size(); ++i) {
    ConvBlockParams& block = params->conv[i];
    Tensor z = Conv2dForward(current, block.kernels, block.bias);
    BatchNormCache bn_cache;
    Tensor normed = BatchNormForward(
        z, block.gamma, block.beta, train, &block.running_mean,
        &block.running_var, kBnMomentum, kBnEps, keep ? &bn_cache : nullptr);
    z = Tensor();  // release pre-norm activations early
    Tensor activated = LeakyReluForward(normed);
    normed = Tensor();
    if (PoolAfterConv(i)) {
      std::vector<std::size_t> pre_pool_shape = activated.shape();
      PoolResult pooled = MaxPool2x2Forward(activated);
      if (keep) {
        TrunkCacheStage& stage = cache->stages[i];
        stage.bn = std::move(bn_cache);
        stage.act_out = std::move(activated);
        stage.pool_out = pooled.output;
        stage.pool_argmax = std::move(pooled.argmax);
        stage.pre_pool_shape = std::move(pre_pool_shape);
        stage.pooled = true;
      }
      current = std::move(pooled.output);
    } else {
      if (keep) {
        TrunkCacheStage& stage = cache->stages[i];
        stage.bn = std::move(bn_cache);
        stage.act_out = activated;
        stage.pooled = false;
      }
      current = std::move(activated);
    }
  }

  std::size_t flatten = FlattenLength(spec);
  Tensor flat = std::move(current);
  flat.Reshape({batch, flatten});
  Tensor embedding = DenseForward(flat, params->embed_w, params->embed_b);
  if (keep) cache->flat = flat;

  TrunkOutputs out;
  if (spec.head_batchnorm) {
    BatchNormCache bn_cache;
    Tensor normed = BatchNormForward(
        embedding, params->embed_gamma, params->embed_beta, train,
        &params->embed_rmean, &params->embed_rvar, kBnMomentum, kBnEps,
        keep ? &bn_cache : nullptr);
    Tensor activated = LeakyReluForward(normed);
    if (keep) {
      cache->embed_bn = std::move(bn_cache);
      cache->embed_act = activated;
      cache->embedding = embedding;
    }
    out.graph = std::move(activated);
  } else {
    if (keep) cache->embedding = embedding;
    out.graph = embedding;
  }
  out.embedding = std::move(embedding);
  return out;
}

void TrunkBackward(const Tensor& grad_graph, const TrunkCache& cache,
                   const ModelParams& params, ModelGrads* grads) {
  const ArchitectureSpec& spec = params.spec;
  Tensor g;
  if (spec.head_batchnorm) {
    g = LeakyReluBackward(cache.embed_act, grad_graph);
    g = BatchNormBackward(cache.embed_bn, params.embed_gamma, g,
                          &grads->embed_gamma, &grads->embed_beta);
  } else {
    g = grad_graph;
  }

  Tensor grad_flat;
  DenseBackward(cache.flat, params.embed_w, g, &grad_flat, &grads->embed_w,
                &grads->embed_b);

  // Reshape the flat gradient back to the last stage's output shape.
  std::vector<std::size_t> last_shape;
  {
    const TrunkCacheStage& last = cache.stages.back();
    last_shape = last.pooled ? last.pool_out.shape() : last.act_out.shape();
  }
  grad_flat.Reshape(last_shape);
  g = std::move(grad_flat);

  for (std::size_t i = spec.convs.size(); i-- > 0;) {
    const TrunkCacheStage& stage = cache.stages[i];
    if (stage.pooled) {
      g = MaxPool2x2Backward(stage.pre_pool_shape, stage.pool_argmax, g);
    }
    g = LeakyReluBackward(stage.act_out, g);
    g = BatchNormBackward(stage.bn, params.conv[i].gamma, g,
                          &grads->conv[i].gamma, &grads->conv[i].beta);
    const Tensor& input =
        i == 0 ? cache.input
               : (cache.stages[i - 1].pooled ? cache.stages[i - 1].pool_out
                                             : cache.stages[i - 1].act_out);
    Tensor grad_input;
    // The first conv's input needs no gradient.
    Conv2dBackward(input, params.conv[i].kernels, g,
                   i == 0 ? nullptr : &grad_input, &grads->conv[i].kernels,
                   &grads->conv[i].bias);
    g = std::move(grad_input);
  }
}

std::vector<double> L1Distance(const std::vector<double>& e1,
                               const std::vector<double>& e2) {
  if (e1.size() != e2.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "L1 distance needs equal-length vectors");
  }
  std::vector<double> out(e1.size());
  for (std::size_t i = 0; i < e1.size(); ++i) {
    out[i] = std::abs(e1[i] - e2[i]);
  }
  return out;
}

PairLogits ClassifyPair(const std::vector<double>& distance,
                        const ModelParams& params) {
  std::size_t d = params.head_w.dim(1);
  if (distance.size() != d) {
    throw Error(ErrorCode::kShapeMismatch,
                "distance vector length " + std::to_string(distance.size()) +
                    " vs head width " + std::to_string(d));
  }
  PairLogits out;
  const double* w = params.head_w.data();
  out.g1 = params.head_b[0];
  out.g2 = params.head_b[1];
  for (std::size_t k = 0; k < d; ++k) {
    out.g1 += w[k] * distance[k];
    out.g2 += w[d + k] * distance[k];
  }
  double m = std::max(out.g1, out.g2);
  double exp1 = std::exp(out.g1 - m), exp2 = std::exp(out.g2 - m);
  out.p1 = exp1 / (exp1 + exp2);
  out.p2 = exp2 / (exp1 + exp2);
  return out;
}

double CrossEntropyLoss(double p1, double p2, int label) {
  return label == 0 ? -std::log(p1) : -std::log(p2);
}

double CrossEntropyFromLogits(double g1, double g2, int label) {
  double m = std::max(g1, g2);
  double lse = m + std::log(std::exp(g1 - m) + std::exp(g2 - m));
  return lse - (label == 0 ? g1 : g2);
}

namespace {

double Dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

double CosineLoss(const std::vector<double>& e1, const std::vector<double>& e2,
                  int label, bool clamp) {
  if (e1.size() != e2.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "cosine loss needs equal-length vectors");
  }
  double n1 = std::sqrt(Dot(e1.data(), e1.data(), e1.size()));
  double n2 = std::sqrt(Dot(e2.data(), e2.data(), e2.size()));
  if (n1 == 0.0 || n2 == 0.0) {
    throw Error(ErrorCode::kZeroNormEmbedding,
                "cosine loss is undefined for a zero embedding");
  }
  double c = Dot(e1.data(), e2.data(), e1.size()) / (n1 * n2);
  if (label == 0) return 1.0 - c;
  return clamp ? std::max(0.0, c) : c;
}

BatchLossResult CrossEntropyBatch(const Tensor& graph,
                                  const std::vector<int>& labels,
                                  const ModelParams& params,
                                  ModelGrads* grads) {
  std::size_t pairs = labels.size();
  std::size_t d = graph.dim(1);
  if (graph.dim(0) != 2 * pairs) {
    throw Error(ErrorCode::kShapeMismatch,
                "graph batch must hold both windows of every pair");
  }
  BatchLossResult result;
  bool want_grads = grads != nullptr;
  if (want_grads) result.grad_graph = Tensor(graph.shape());
  const double* g = graph.data();
  const double* w = params.head_w.data();
  double inv_pairs = 1.0 / static_cast<double>(pairs);
  double loss_sum = 0.0;

  for (std::size_t i = 0; i < pairs; ++i) {
    const double* e1 = g + i * d;
    const double* e2 = g + (pairs + i) * d;
    double g1 = params.head_b[0], g2 = params.head_b[1];
    for (std::size_t k = 0; k < d; ++k) {
      double dist = std::abs(e1[k] - e2[k]);
      g1 += w[k] * dist;
      g2 += w[d + k] * dist;
    }
    int y = labels[i];
    loss_sum += CrossEntropyFromLogits(g1, g2, y);

    double m = std::max(g1, g2);
    double exp1 = std::exp(g1 - m), exp2 = std::exp(g2 - m);
    double p1 = exp1 / (exp1 + exp2);
    double p2 = exp2 / (exp1 + exp2);
    int predicted = p1 >= p2 ? 0 : 1;
    if (predicted == y) ++result.correct;

    if (want_grads) {
      double dg1 = (p1 - (y == 0 ? 1.0 : 0.0)) * inv_pairs;
      double dg2 = (p2 - (y == 1 ? 1.0 : 0.0)) * inv_pairs;
      double* head_w1 = grads->head_w.data();
      double* head_w2 = head_w1 + d;
      double* out1 = result.grad_graph.data() + i * d;
      double* out2 = result.grad_graph.data() + (pairs + i) * d;
      for (std::size_t k = 0; k < d; ++k) {
        double diff = e1[k] - e2[k];
        double dist = std::abs(diff);
        head_w1[k] += dg1 * dist;
        head_w2[k] += dg2 * dist;
        double d_dist = dg1 * w[k] + dg2 * w[d + k];
        double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        out1[k] = d_dist * sign;
        out2[k] = -d_dist * sign;
      }
      grads->head_b[0] += dg1;
      grads->head_b[1] += dg2;
    }
  }
  result.mean_loss = loss_sum * inv_pairs;
  return result;
}

BatchLossResult CosineBatch(const Tensor& graph, const std::vector<int>& labels,
                            bool clamp, ModelGrads* grads) {
  std::size_t pairs = labels.size();
  std::size_t d = graph.dim(1);
  if (graph.dim(0) != 2 * pairs) {
    throw Error(ErrorCode::kShapeMismatch,
                "graph batch must hold both windows of every pair");
  }
  BatchLossResult result;
  bool want_grads = grads != nullptr;
  if (want_grads) result.grad_graph = Tensor(graph.shape());
  const double* g = graph.data();
  double inv_pairs = 1.0 / static_cast<double>(pairs);
  double loss_sum = 0.0;

  for (std::size_t i = 0; i < pairs; ++i) {
    const double* e1 = g + i * d;
    const double* e2 = g + (pairs + i) * d;
    double n1 = std::sqrt(Dot(e1, e1, d));
    double n2 = std::sqrt(Dot(e2, e2, d));
    if (n1 == 0.0 || n2 == 0.0) {
      throw Error(ErrorCode::kZeroNormEmbedding,
                  "cosine loss is undefined for a zero embedding (pair " +
                      std::to_string(i) + ")");
    }
    double c = Dot(e1, e2, d) / (n1 * n2);
    int y = labels[i];

    double loss, dc;  // dc = d(loss)/dC
    if (y == 0) {
      loss = 1.0 - c;
      dc = -1.0;
    } else if (clamp) {
      loss = std::max(0.0, c);
      dc = c > 0.0 ? 1.0 : 0.0;
    } else {
      loss = c;
      dc = 1.0;
    }
    loss_sum += loss;
    if ((c > 0.5 ? 0 : 1) == y) ++result.correct;

    if (want_grads) {
      double scale = dc * inv_pairs;
      double* out1 = result.grad_graph.data() + i * d;
      double* out2 = result.grad_graph.data() + (pairs + i) * d;
      double inv_n1n2 = 1.0 / (n1 * n2);
      double c_over_n1sq = c / (n1 * n1);
      double c_over_n2sq = c / (n2 * n2);
      for (std::size_t k = 0; k < d; ++k) {
        out1[k] = scale * (e2[k] * inv_n1n2 - c_over_n1sq * e1[k]);
        out2[k] = scale * (e1[k] * inv_n1n2 - c_over_n2sq * e2[k]);
      }
    }
  }
  result.mean_loss = loss_sum * inv_pairs;
  return result;
}

MirrorStats WeightMirrorStats(const ModelParams& params) {
  if (params.trained_loss != LossKind::kCrossEntropy) {
    throw Error(ErrorCode::kWrongLossKind,
                "weight mirroring is defined for the cross-entropy head");
  }
  std::size_t d = params.head_w.dim(1);
  const double* w1 = params.head_w.data();
  const double* w2 = w1 + d;
  MirrorStats stats;
  double sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) sum += std::abs(w1[k] + w2[k]);
  stats.mean_abs_sum = sum / static_cast<double>(d);
  double sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double dev = std::abs(w1[k] + w2[k]) - stats.mean_abs_sum;
    sq += dev * dev;
  }
  stats.std_abs_sum = std::sqrt(sq / static_cast<double>(d));
  double n1 = std::sqrt(Dot(w1, w1, d));
  double n2 = std::sqrt(Dot(w2, w2, d));
  stats.cosine = (n1 == 0.0 || n2 == 0.0) ? 0.0 : Dot(w1, w2, d) / (n1 * n2);
  stats.b1 = params.head_b[0];
  stats.b2 = params.head_b[1];
  return stats;
}

}  // namespace npc
