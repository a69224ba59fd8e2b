// include/npc/eval.h

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

#ifndef NPC_EVAL_H_
#define NPC_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "npc/feature_io.h"

namespace npc {

// Flat n×dim matrix with one speaker label per row.
struct LabeledVectorSet {
  std::size_t dim = 0;
  std::vector<double> vectors;  // row-major
  std::vector<std::string> labels;

  std::size_t count() const { return labels.size(); }
  const double* Row(std::size_t i) const { return vectors.data() + i * dim; }
  void Append(const double* vec, const std::string& label);
};

// Label of the Euclidean-nearest enrolled vector; ties break toward the
// lowest enrolled index.
std::string Knn1Classify(const LabeledVectorSet& enrolled, const double* query,
                         std::size_t dim);

// One utterance of a labeled evaluation corpus: per-frame feature rows.
struct UtteranceFeatures {
  std::string utterance_id;
  std::string speaker_id;
  FeatureMatrix frames;
};

struct AccuracyCell {
  std::size_t enroll_count = 0;
  double mean_accuracy = 0.0;
  std::vector<double> per_repeat;
};

// Repeated held-out 1-NN speaker identification over individual frames.
// Splits depend only on utterance ids and the seed (corpus order and
// feature contents never affect them), so different feature types reuse
// identical splits.  Query frames are subsampled to at most
// max_query_frames per utterance (seeded) to bound runtime.
std::vector<AccuracyCell> FrameIdExperiment(
    const std::vector<UtteranceFeatures>& corpus,
    const std::vector<std::size_t>& enroll_counts, std::size_t repeats,
    std::size_t heldout_per_speaker, std::uint64_t seed,
    std::size_t max_query_frames = 2000);

// Same protocol over mean‖std pooled utterance vectors.
std::vector<AccuracyCell> UtteranceIdExperiment(
    const std::vector<UtteranceFeatures>& corpus,
    const std::vector<std::size_t>& enroll_counts, std::size_t repeats,
    std::size_t heldout_per_speaker, std::uint64_t seed);

struct Trial {
  std::string id_a;
  std::string id_b;
  bool target = false;
};

std::vector<Trial> ReadTrialFile(const std::string& path);
void WriteTrialFile(const std::string& path, const std::vector<Trial>& trials);

// Cosine similarity per trial; higher means more likely same speaker.
std::vector<double> ScoreTrials(
    const std::vector<Trial>& trials,
    const std::map<std::string, std::vector<double>>& vectors);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Threshold sweep over score midpoints with FRR = P(target < thr) and
// FAR = P(non-target ≥ thr); linear interpolation between the bracketing
// thresholds where FAR − FRR changes sign.
EerResult ComputeEer(const std::vector<double>& scores,
                     const std::vector<bool>& targets);

// min over swept thresholds of
//   c_miss·p_target·FRR + c_fa·(1−p_target)·FAR,
// normalized by min(c_miss·p_target, c_fa·(1−p_target)).
double ComputeMinDcf(const std::vector<double>& scores,
                     const std::vector<bool>& targets, double p_target = 0.01,
                     double c_miss = 1.0, double c_fa = 1.0);

}  // namespace npc

#endif  // NPC_EVAL_H_
