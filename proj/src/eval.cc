// src/eval.cc

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

#include "npc/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include "npc/embedder.h"
#include "npc/error.h"
#include "npc/rng.h"

namespace npc {

namespace {

// Portable 64-bit FNV-1a, used to derive a per-utterance RNG stream from
// the utterance id alone so subsampling never depends on corpus order.
std::uint64_t HashId(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct SpeakerGroup {
  std::string speaker;
  std::vector<std::size_t> utterances;  // corpus indices, sorted by id
};

std::vector<SpeakerGroup> GroupBySpeaker(
    const std::vector<UtteranceFeatures>& corpus,
    const std::vector<std::size_t>& enroll_counts, std::size_t repeats,
    std::size_t heldout_per_speaker) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyData, "empty evaluation corpus");
  }
  if (enroll_counts.empty() || repeats == 0 || heldout_per_speaker == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "need enrollment counts, repeats, and a held-out size");
  }
  std::size_t max_enroll = 0;
  for (std::size_t n : enroll_counts) {
    if (n == 0) {
      throw Error(ErrorCode::kInvalidArgument, "enrollment count must be > 0");
    }
    max_enroll = std::max(max_enroll, n);
  }

  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> by_speaker;
  std::map<std::string, bool> seen_ids;
  std::size_t dim = corpus[0].frames.num_coeffs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const UtteranceFeatures& utt = corpus[i];
    if (!seen_ids.emplace(utt.utterance_id, true).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate utterance id: " + utt.utterance_id);
    }
    if (utt.frames.num_coeffs != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  utt.utterance_id + ": feature width " +
                      std::to_string(utt.frames.num_coeffs) + " vs " +
                      std::to_string(dim));
    }
    by_speaker[utt.speaker_id].emplace_back(utt.utterance_id, i);
  }
  if (by_speaker.size() < 2) {
    throw Error(ErrorCode::kInsufficientSpeakers,
                "identification needs at least two speakers");
  }

  std::vector<SpeakerGroup> groups;
  for (auto& [speaker, utts] : by_speaker) {
    if (utts.size() < max_enroll + heldout_per_speaker) {
      throw Error(ErrorCode::kInsufficientUtterances,
                  speaker + ": " + std::to_string(utts.size()) +
                      " utterances, need " +
                      std::to_string(max_enroll + heldout_per_speaker));
    }
    std::sort(utts.begin(), utts.end());
    SpeakerGroup group;
    group.speaker = speaker;
    for (auto& [id, index] : utts) group.utterances.push_back(index);
    groups.push_back(std::move(group));
  }
  return groups;
}

struct SpeakerSplit {
  std::vector<std::size_t> heldout;  // corpus indices
  std::vector<std::size_t> pool;     // enrollment order for this repeat
};

// Per-speaker splits for one repeat.  Each speaker consumes an independent
// RNG stream keyed by (seed, repeat, speaker rank), so the split of one
// speaker never depends on another's utterance count.
std::vector<SpeakerSplit> MakeSplits(const std::vector<SpeakerGroup>& groups,
                                     std::uint64_t seed, std::size_t repeat,
                                     std::size_t heldout_per_speaker) {
  std::uint64_t base = MixSeed(seed, repeat);
  std::vector<SpeakerSplit> splits(groups.size());
  for (std::size_t s = 0; s < groups.size(); ++s) {
    std::vector<std::size_t> shuffled = groups[s].utterances;
    Rng rng(MixSeed(base, s));
    rng.Shuffle(&shuffled);
    splits[s].heldout.assign(shuffled.begin(),
                             shuffled.begin() + heldout_per_speaker);
    splits[s].pool.assign(shuffled.begin() + heldout_per_speaker,
                          shuffled.end());
  }
  return splits;
}

std::vector<AccuracyCell> FinalizeCells(
    const std::vector<std::size_t>& enroll_counts,
    const std::vector<std::vector<double>>& per_cell_repeat) {
  std::vector<AccuracyCell> cells;
  for (std::size_t c = 0; c < enroll_counts.size(); ++c) {
    AccuracyCell cell;
    cell.enroll_count = enroll_counts[c];
    cell.per_repeat = per_cell_repeat[c];
    cell.mean_accuracy =
        std::accumulate(cell.per_repeat.begin(), cell.per_repeat.end(), 0.0) /
        static_cast<double>(cell.per_repeat.size());
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace

void LabeledVectorSet::Append(const double* vec, const std::string& label) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "set the vector dimension before appending");
  }
  vectors.insert(vectors.end(), vec, vec + dim);
  labels.push_back(label);
}

std::string Knn1Classify(const LabeledVectorSet& enrolled, const double* query,
                         std::size_t dim) {
  if (enrolled.count() == 0) {
    throw Error(ErrorCode::kEmptyEnrollment, "no enrolled vectors");
  }
  if (dim != enrolled.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query dimension " + std::to_string(dim) + " vs enrolled " +
                    std::to_string(enrolled.dim));
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < enrolled.count(); ++i) {
    const double* row = enrolled.Row(i);
    double dist = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double diff = row[k] - query[k];
      dist += diff * diff;
    }
    if (dist < best_dist) {  // strict: ties keep the lowest index
      best_dist = dist;
      best = i;
    }
  }
  return enrolled.labels[best];
}

std::vector<AccuracyCell> FrameIdExperiment(
    const std::vector<UtteranceFeatures>& corpus,
    const std::vector<std::size_t>& enroll_counts, std::size_t repeats,
    std::size_t heldout_per_speaker, std::uint64_t seed,
    std::size_t max_query_frames) {
  if (max_query_frames == 0) {
    throw Error(ErrorCode::kInvalidArgument, "query frame cap must be > 0");
  }
  std::vector<SpeakerGroup> groups =
      GroupBySpeaker(corpus, enroll_counts, repeats, heldout_per_speaker);
  std::size_t dim = corpus[0].frames.num_coeffs;

  std::vector<std::vector<double>> per_cell_repeat(enroll_counts.size());
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<SpeakerSplit> splits =
        MakeSplits(groups, seed, r, heldout_per_speaker);

    // Query frames per held-out utterance, subsampled once per repeat.
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> queries;
    std::uint64_t base = MixSeed(seed, r);
    for (std::size_t s = 0; s < groups.size(); ++s) {
      for (std::size_t utt : splits[s].heldout) {
        std::size_t frames = corpus[utt].frames.num_frames;
        std::vector<std::size_t> picked(frames);
        std::iota(picked.begin(), picked.end(), 0);
        if (frames > max_query_frames) {
          Rng rng(MixSeed(base, HashId(corpus[utt].utterance_id)));
          rng.Shuffle(&picked);
          picked.resize(max_query_frames);
        }
        queries.emplace_back(utt, std::move(picked));
      }
    }

    for (std::size_t c = 0; c < enroll_counts.size(); ++c) {
      LabeledVectorSet enrolled;
      enrolled.dim = dim;
      for (std::size_t s = 0; s < groups.size(); ++s) {
        for (std::size_t e = 0; e < enroll_counts[c]; ++e) {
          const UtteranceFeatures& utt = corpus[splits[s].pool[e]];
          for (std::size_t f = 0; f < utt.frames.num_frames; ++f) {
            enrolled.Append(utt.frames.values.data() + f * dim,
                            groups[s].speaker);
          }
        }
      }
      std::size_t correct = 0, total = 0;
      for (const auto& [utt, frames] : queries) {
        const UtteranceFeatures& query = corpus[utt];
        for (std::size_t f : frames) {
          std::string predicted = Knn1Classify(
              enrolled, query.frames.values.data() + f * dim, dim);
          if (predicted == query.speaker_id) ++correct;
          ++total;
        }
      }
      if (total == 0) {
        throw Error(ErrorCode::kEmptyData, "no query frames in repeat " +
                                               std::to_string(r));
      }
      per_cell_repeat[c].push_back(static_cast<double>(correct) /
                                   static_cast<double>(total));
    }
  }
  return FinalizeCells(enroll_counts, per_cell_repeat);
}

std::vector<AccuracyCell> UtteranceIdExperiment(
    const std::vector<UtteranceFeatures>& corpus,
    const std::vector<std::size_t>& enroll_counts, std::size_t repeats,
    std::size_t heldout_per_speaker, std::uint64_t seed) {
  std::vector<SpeakerGroup> groups =
      GroupBySpeaker(corpus, enroll_counts, repeats, heldout_per_speaker);

  // Pool every utterance once; splits then work over pooled vectors.
  std::vector<std::vector<double>> pooled(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    pooled[i] = PoolUtterance(corpus[i].frames);
  }
  std::size_t dim = pooled[0].size();

  std::vector<std::vector<double>> per_cell_repeat(enroll_counts.size());
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<SpeakerSplit> splits =
        MakeSplits(groups, seed, r, heldout_per_speaker);
    for (std::size_t c = 0; c < enroll_counts.size(); ++c) {
      LabeledVectorSet enrolled;
      enrolled.dim = dim;
      for (std::size_t s = 0; s < groups.size(); ++s) {
        for (std::size_t e = 0; e < enroll_counts[c]; ++e) {
          enrolled.Append(pooled[splits[s].pool[e]].data(),
                          groups[s].speaker);
        }
      }
      std::size_t correct = 0, total = 0;
      for (std::size_t s = 0; s < groups.size(); ++s) {
        for (std::size_t utt : splits[s].heldout) {
          if (Knn1Classify(enrolled, pooled[utt].data(), dim) ==
              groups[s].speaker) {
            ++correct;
          }
          ++total;
        }
      }
      per_cell_repeat[c].push_back(static_cast<double>(correct) /
                                   static_cast<double>(total));
    }
  }
  return FinalizeCells(enroll_counts, per_cell_repeat);
}

std::vector<Trial> ReadTrialFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open: " + path);
  }
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_no) +
                      ": expected uttA<TAB>uttB<TAB>target|nontarget");
    }
    Trial trial;
    trial.id_a = fields[0];
    trial.id_b = fields[1];
    if (fields[2] == "target") {
      trial.target = true;
    } else if (fields[2] == "nontarget") {
      trial.target = false;
    } else {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_no) + ": bad trial kind '" +
                      fields[2] + "'");
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

void WriteTrialFile(const std::string& path, const std::vector<Trial>& trials) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot open for writing: " + path);
  }
  for (const Trial& trial : trials) {
    out << trial.id_a << '\t' << trial.id_b << '\t'
        << (trial.target ? "target" : "nontarget") << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write: " + path);
  }
}

std::vector<double> ScoreTrials(
    const std::vector<Trial>& trials,
    const std::map<std::string, std::vector<double>>& vectors) {
  std::vector<double> scores;
  scores.reserve(trials.size());
  for (const Trial& trial : trials) {
    auto a = vectors.find(trial.id_a);
    auto b = vectors.find(trial.id_b);
    if (a == vectors.end() || b == vectors.end()) {
      throw Error(ErrorCode::kNotFound,
                  "no vector for utterance " +
                      (a == vectors.end() ? trial.id_a : trial.id_b));
    }
    const std::vector<double>& va = a->second;
    const std::vector<double>& vb = b->second;
    if (va.size() != vb.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  trial.id_a + " and " + trial.id_b +
                      " have different dimensions");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < va.size(); ++k) {
      dot += va[k] * vb[k];
      na += va[k] * va[k];
      nb += vb[k] * vb[k];
    }
    if (na == 0.0 || nb == 0.0) {
      throw Error(ErrorCode::kZeroNormVector,
                  "zero-norm vector in trial " + trial.id_a + " vs " +
                      trial.id_b);
    }
    scores.push_back(dot / (std::sqrt(na) * std::sqrt(nb)));
  }
  return scores;
}

namespace {

struct Sweep {
  std::vector<double> tgt;         // sorted target scores
  std::vector<double> non;         // sorted non-target scores
  std::vector<double> candidates;  // midpoints plus accept-all / reject-all
};

Sweep BuildSweep(const std::vector<double>& scores,
                 const std::vector<bool>& targets) {
  if (scores.size() != targets.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "scores and target flags differ in length");
  }
  Sweep sweep;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite trial score at index " + std::to_string(i));
    }
    (targets[i] ? sweep.tgt : sweep.non).push_back(scores[i]);
  }
  if (sweep.tgt.empty() || sweep.non.empty()) {
    throw Error(ErrorCode::kDegenerateTrials,
                "need at least one target and one non-target trial");
  }
  std::sort(sweep.tgt.begin(), sweep.tgt.end());
  std::sort(sweep.non.begin(), sweep.non.end());

  std::vector<double> distinct = scores;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  sweep.candidates.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    sweep.candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  }
  sweep.candidates.push_back(distinct.back() + 1.0);
  return sweep;
}

// FRR = P(target < thr): misses are targets rejected by the threshold.
double FrrAt(const Sweep& sweep, double thr) {
  std::size_t below =
      std::lower_bound(sweep.tgt.begin(), sweep.tgt.end(), thr) -
      sweep.tgt.begin();
  return static_cast<double>(below) / static_cast<double>(sweep.tgt.size());
}

// FAR = P(non-target ≥ thr): false accepts score at or above the threshold.
double FarAt(const Sweep& sweep, double thr) {
  std::size_t below =
      std::lower_bound(sweep.non.begin(), sweep.non.end(), thr) -
      sweep.non.begin();
  return static_cast<double>(sweep.non.size() - below) /
         static_cast<double>(sweep.non.size());
}

}  // namespace

EerResult ComputeEer(const std::vector<double>& scores,
                     const std::vector<bool>& targets) {
  Sweep sweep = BuildSweep(scores, targets);
  // FAR − FRR is nonincreasing in the threshold and spans +1 → −1 over the
  // sentinels, so a sign change always exists.
  double prev_far = FarAt(sweep, sweep.candidates[0]);
  double prev_diff = prev_far - FrrAt(sweep, sweep.candidates[0]);
  for (std::size_t j = 1; j < sweep.candidates.size(); ++j) {
    double far = FarAt(sweep, sweep.candidates[j]);
    double diff = far - FrrAt(sweep, sweep.candidates[j]);
    if (diff <= 0.0) {
      double alpha = prev_diff / (prev_diff - diff);
      EerResult result;
      result.eer = prev_far + alpha * (far - prev_far);
      result.threshold = sweep.candidates[j - 1] +
                         alpha * (sweep.candidates[j] - sweep.candidates[j - 1]);
      return result;
    }
    prev_far = far;
    prev_diff = diff;
  }
  throw Error(ErrorCode::kDegenerateTrials, "no error-rate crossing found");
}

double ComputeMinDcf(const std::vector<double>& scores,
                     const std::vector<bool>& targets, double p_target,
                     double c_miss, double c_fa) {
  if (p_target <= 0.0 || p_target >= 1.0 || c_miss <= 0.0 || c_fa <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "p_target must lie in (0,1) and costs must be positive");
  }
  Sweep sweep = BuildSweep(scores, targets);
  double denom = std::min(c_miss * p_target, c_fa * (1.0 - p_target));
  double best = std::numeric_limits<double>::infinity();
  for (double thr : sweep.candidates) {
    double cost = c_miss * p_target * FrrAt(sweep, thr) +
                  c_fa * (1.0 - p_target) * FarAt(sweep, thr);
    best = std::min(best, cost);
  }
  return best / denom;
}

}  // namespace npc
