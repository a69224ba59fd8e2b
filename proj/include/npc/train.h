// include/npc/train.h

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

#ifndef NPC_TRAIN_H_
#define NPC_TRAIN_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "npc/feature_io.h"
#include "npc/model.h"
#include "npc/optimizer.h"
#include "npc/sampler.h"

namespace npc {

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // argmax validation accuracy
};

struct TrainConfig {
  LossKind loss = LossKind::kCrossEntropy;
  std::size_t batch_size = 128;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double lr = 1e-4;
  double weight_decay = 1e-6;
  bool cosine_clamp = false;
  // Stops after the first epoch whose validation accuracy reaches this
  // value; > 1 disables the stop.
  double stop_at_val_accuracy = 2.0;
  // Called after each epoch with (epoch index, stats); may be empty.
  std::function<void(std::size_t, const EpochStats&)> progress;
};

struct TrainResult {
  ModelParams params;  // snapshot from the best validation epoch
  RmsPropState opt_state;
  TrainReport report;
};

// Seeded-shuffle epoch loop over materialized pair batches.  Both windows
// of every pair go through the trunk in one combined batch, so batch-norm
// statistics are identical for the two sides and the loss is exactly
// symmetric under swapping (x1, x2).
TrainResult Train(const std::vector<PairSpec>& train_pairs,
                  const std::vector<PairSpec>& val_pairs,
                  const FeatureStore& store, const ArchitectureSpec& arch,
                  const TrainConfig& config);

// Pair-classification accuracy of `params` on `pairs` in eval mode.
double EvaluateAccuracy(const std::vector<PairSpec>& pairs,
                        const FeatureStore& store, ModelParams* params,
                        LossKind loss, bool cosine_clamp,
                        std::size_t batch_size);

}  // namespace npc

#endif  // NPC_TRAIN_H_
