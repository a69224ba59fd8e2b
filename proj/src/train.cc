// src/train.cc

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

#include "npc/train.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "npc/error.h"
#include "npc/rng.h"

namespace npc {

namespace {

// Both windows of every pair in one trunk batch: rows [0, B) hold x1,
// rows [B, 2B) hold x2, so batch-norm statistics are shared and the loss
// is exactly symmetric under swapping the two sides.
Tensor CombinedBatch(const std::vector<PairSpec>& pairs,
                     const std::vector<std::size_t>& order, std::size_t begin,
                     std::size_t end, const FeatureStore& store,
                     const ArchitectureSpec& arch, std::vector<int>* labels) {
  std::size_t batch = end - begin;
  std::size_t d = arch.input_frames, m = arch.input_coeffs;
  Tensor combined({2 * batch, 1, d, m});
  labels->resize(batch);
  std::size_t window = d * m;
  for (std::size_t i = 0; i < batch; ++i) {
    const PairSpec& pair = pairs[order[begin + i]];
    if (pair.window_len != d) {
      throw Error(ErrorCode::kShapeMismatch,
                  "pair window length " + std::to_string(pair.window_len) +
                      " vs model input " + std::to_string(d));
    }
    ContrastivePair data = Materialize(pair, store);
    if (data.x1.dim(1) != m) {
      throw Error(ErrorCode::kShapeMismatch,
                  "feature width " + std::to_string(data.x1.dim(1)) +
                      " vs model input " + std::to_string(m));
    }
    std::memcpy(combined.data() + i * window, data.x1.data(),
                window * sizeof(double));
    std::memcpy(combined.data() + (batch + i) * window, data.x2.data(),
                window * sizeof(double));
    (*labels)[i] = data.label;
  }
  return combined;
}

BatchLossResult BatchLoss(const Tensor& graph, const std::vector<int>& labels,
                          const ModelParams& params, LossKind loss, bool clamp,
                          ModelGrads* grads) {
  return loss == LossKind::kCrossEntropy
             ? CrossEntropyBatch(graph, labels, params, grads)
             : CosineBatch(graph, labels, clamp, grads);
}

}  // namespace

TrainResult Train(const std::vector<PairSpec>& train_pairs,
                  const std::vector<PairSpec>& val_pairs,
                  const FeatureStore& store, const ArchitectureSpec& arch,
                  const TrainConfig& config) {
  if (train_pairs.empty()) {
    throw Error(ErrorCode::kEmptyData, "no training pairs");
  }
  if (config.batch_size == 0 || config.epochs == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "batch size and epoch count must be positive");
  }

  ModelParams params = BuildModel(arch, config.seed);
  params.trained_loss = config.loss;
  std::vector<NamedTensor> learnable = LearnableTensors(&params);
  std::vector<Tensor*> param_ptrs;
  for (NamedTensor& named : learnable) param_ptrs.push_back(named.tensor);
  RmsPropState opt_state = MakeRmsPropState(param_ptrs);
  RmsPropConfig opt_config;
  opt_config.lr = config.lr;
  opt_config.weight_decay = config.weight_decay;

  // The shuffle stream is independent of the init stream.
  Rng shuffle_rng(MixSeed(config.seed, 1));
  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double best_val = -1.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.Shuffle(&order);
    double loss_sum = 0.0;
    std::size_t correct = 0, seen = 0, batch_index = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size, ++batch_index) {
      std::size_t end = std::min(begin + config.batch_size, order.size());
      std::vector<int> labels;
      Tensor combined =
          CombinedBatch(train_pairs, order, begin, end, store, arch, &labels);
      TrunkCache cache;
      TrunkOutputs out = TrunkForward(combined, &params, true, &cache);
      ModelGrads grads = MakeZeroGrads(params);
      BatchLossResult batch = BatchLoss(out.graph, labels, params, config.loss,
                                        config.cosine_clamp, &grads);
      if (!std::isfinite(batch.mean_loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "non-finite loss in batch " + std::to_string(batch_index) +
                        " of epoch " + std::to_string(epoch));
      }
      TrunkBackward(batch.grad_graph, cache, params, &grads);
      std::vector<Tensor*> grad_ptrs = GradTensors(&grads);
      std::vector<const Tensor*> const_grads(grad_ptrs.begin(),
                                             grad_ptrs.end());
      RmsPropStep(param_ptrs, const_grads, &opt_state, opt_config);
      loss_sum += batch.mean_loss * static_cast<double>(labels.size());
      correct += batch.correct;
      seen += labels.size();
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(seen);
    stats.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(seen);
    stats.val_accuracy =
        val_pairs.empty()
            ? stats.train_accuracy
            : EvaluateAccuracy(val_pairs, store, &params, config.loss,
                               config.cosine_clamp, config.batch_size);
    result.report.epochs.push_back(stats);
    if (stats.val_accuracy > best_val) {
      best_val = stats.val_accuracy;
      result.report.best_epoch = epoch;
      result.params = params;
    }
    if (config.progress) config.progress(epoch, stats);
    if (stats.val_accuracy >= config.stop_at_val_accuracy) break;
  }
  result.opt_state = std::move(opt_state);
  return result;
}

double EvaluateAccuracy(const std::vector<PairSpec>& pairs,
                        const FeatureStore& store, ModelParams* params,
                        LossKind loss, bool cosine_clamp,
                        std::size_t batch_size) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kEmptyData, "no pairs to evaluate");
  }
  if (batch_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be positive");
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < pairs.size(); begin += batch_size) {
    std::size_t end = std::min(begin + batch_size, pairs.size());
    std::vector<int> labels;
    Tensor combined =
        CombinedBatch(pairs, order, begin, end, store, params->spec, &labels);
    TrunkOutputs out = TrunkForward(combined, params, false, nullptr);
    BatchLossResult batch =
        BatchLoss(out.graph, labels, *params, loss, cosine_clamp, nullptr);
    correct += batch.correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

}  // namespace npc
