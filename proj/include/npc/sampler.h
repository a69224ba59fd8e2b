// include/npc/sampler.h

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

#ifndef NPC_SAMPLER_H_
#define NPC_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "npc/feature_io.h"
#include "npc/manifest.h"
#include "npc/tensor.h"

namespace npc {

// A contrastive sample by reference: two window start positions plus the
// binary label (0 genuine, 1 impostor).
struct PairSpec {
  std::string left_id;
  std::size_t left_start = 0;
  std::string right_id;
  std::size_t right_start = 0;
  int label = 0;
  std::size_t window_len = 0;
};

struct ContrastivePair {
  Tensor x1;  // window_len × num_coeffs
  Tensor x2;
  int label = 0;
};

// Stream extent entry used by pair generation: id plus frame count.
struct StreamFrames {
  std::string source_id;
  std::size_t num_frames = 0;
};

// Adjacent-window genuine pairs (t, t+d) for t = 0, delta, 2·delta, ...
// while t + 2d <= T.  Index arithmetic only; never touches features.
std::vector<PairSpec> GenerateGenuinePairs(const std::string& source_id,
                                           std::size_t num_frames,
                                           std::size_t d, std::size_t delta);
std::vector<PairSpec> GenerateGenuinePairs(const FeatureMatrix& features,
                                           std::size_t d, std::size_t delta);

// One impostor per genuine pair: keeps the genuine left window, draws the
// right window from a uniformly chosen different stream (among those long
// enough to hold one window) at a uniform valid start.
std::vector<PairSpec> GenerateImpostorPairs(
    const std::vector<StreamFrames>& streams,
    const std::vector<PairSpec>& genuine, std::uint64_t seed);

ContrastivePair Materialize(const PairSpec& pair, const FeatureStore& store);

// Synthetic dialog mixing: per stream, keeps the even-indexed half of the
// utterances and inserts one random other-speaker utterance after each
// kept one, so every utterance junction is a speaker change.  Operates on
// feature frames; mixed streams are named `<source_id>_mix`.
struct MixedCorpus {
  FeatureStore features;
  std::vector<LabeledStream> streams;
};

MixedCorpus MixDialogs(const FeatureStore& features,
                       const std::vector<LabeledStream>& streams,
                       std::uint64_t seed);

struct NoiseReport {
  std::size_t genuine_pairs = 0;
  std::size_t corrupted_pairs = 0;
  std::size_t change_points = 0;
  double corrupted_fraction = 0.0;
};

// Brute-force count of genuine pairs whose [t, t+2d) span crosses a true
// speaker boundary.
NoiseReport MeasureLabelNoise(const std::vector<LabeledStream>& streams,
                              std::size_t d, std::size_t delta);

// Pair list file: one `left_id\tleft_start\tright_id\tright_start\ty` line
// per pair, preceded by a `# window_len=<d> shift=<delta>` comment that
// makes the file self-describing.
void WritePairFile(const std::string& path, const std::vector<PairSpec>& pairs,
                   std::size_t d, std::size_t delta);

struct PairFile {
  std::vector<PairSpec> pairs;
  std::size_t window_len = 0;
  std::size_t shift = 0;
};

PairFile ReadPairFile(const std::string& path);

}  // namespace npc

#endif  // NPC_SAMPLER_H_
