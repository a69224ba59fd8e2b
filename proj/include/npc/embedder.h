// include/npc/embedder.h

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

#ifndef NPC_EMBEDDER_H_
#define NPC_EMBEDDER_H_

#include <cstddef>
#include <vector>

#include "npc/feature_io.h"
#include "npc/model.h"

namespace npc {

// Slides a d-frame window over the feature stream and emits the dense
// pre-activation embedding for each position.  stride defaults to 1 frame;
// row count is floor((T − d)/stride) + 1.  Eval mode (running stats).
FeatureMatrix ExtractEmbeddings(const FeatureMatrix& features,
                                ModelParams* params, std::size_t stride = 1,
                                std::size_t batch_windows = 64);

// Sliding mean‖std baseline: row t is the per-coefficient mean followed by
// the population standard deviation of feature rows [t, t+window).
FeatureMatrix MfccStatsStream(const FeatureMatrix& features,
                              std::size_t window = 100);

// Mean concat population-std over all rows of a K×F matrix -> 2F vector.
// Requires K ≥ 2.
std::vector<double> PoolUtterance(const double* values, std::size_t rows,
                                  std::size_t cols);
std::vector<double> PoolUtterance(const FeatureMatrix& frames);

}  // namespace npc

#endif  // NPC_EMBEDDER_H_
