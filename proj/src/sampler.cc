// src/sampler.cc

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

#include "npc/sampler.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "npc/error.h"
#include "npc/rng.h"

namespace npc {

std::vector<PairSpec> GenerateGenuinePairs(const std::string& source_id,
                                           std::size_t num_frames,
                                           std::size_t d, std::size_t delta) {
  if (d < 1 || delta < 1) {
    throw Error(ErrorCode::kInvalidArgument, "d and delta must be >= 1");
  }
  if (num_frames < 2 * d) {
    throw Error(ErrorCode::kStreamTooShort,
                "stream " + source_id + " has " + std::to_string(num_frames) +
                    " frames, need at least " + std::to_string(2 * d));
  }
  std::vector<PairSpec> pairs;
  for (std::size_t t = 0; t + 2 * d <= num_frames; t += delta) {
    PairSpec pair;
    pair.left_id = source_id;
    pair.left_start = t;
    pair.right_id = source_id;
    pair.right_start = t + d;
    pair.label = 0;
    pair.window_len = d;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<PairSpec> GenerateGenuinePairs(const FeatureMatrix& features,
                                           std::size_t d, std::size_t delta) {
  return GenerateGenuinePairs(features.source_id, features.num_frames, d,
                              delta);
}

std::vector<PairSpec> GenerateImpostorPairs(
    const std::vector<StreamFrames>& streams,
    const std::vector<PairSpec>& genuine, std::uint64_t seed) {
  if (streams.size() < 2) {
    throw Error(ErrorCode::kNoOtherStream,
                "impostor sampling needs at least 2 streams, got " +
                    std::to_string(streams.size()));
  }
  Rng rng(seed);
  std::vector<PairSpec> impostors;
  impostors.reserve(genuine.size());
  for (const PairSpec& g : genuine) {
    std::size_t d = g.window_len;
    std::vector<std::size_t> eligible;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      if (streams[s].source_id != g.left_id && streams[s].num_frames >= d) {
        eligible.push_back(s);
      }
    }
    if (eligible.empty()) {
      throw Error(ErrorCode::kNoOtherStream,
                  "no stream other than " + g.left_id +
                      " can hold a window of " + std::to_string(d) +
                      " frames");
    }
    const StreamFrames& other =
        streams[eligible[rng.UniformBelow(eligible.size())]];
    std::size_t starts = other.num_frames - d + 1;
    PairSpec pair;
    pair.left_id = g.left_id;
    pair.left_start = g.left_start;
    pair.right_id = other.source_id;
    pair.right_start = static_cast<std::size_t>(rng.UniformBelow(starts));
    pair.label = 1;
    pair.window_len = d;
    impostors.push_back(std::move(pair));
  }
  return impostors;
}

ContrastivePair Materialize(const PairSpec& pair, const FeatureStore& store) {
  auto slice = [&](const std::string& id, std::size_t start) {
    auto it = store.find(id);
    if (it == store.end()) {
      throw Error(ErrorCode::kMissingFeatures,
                  "no features for stream " + id);
    }
    const FeatureMatrix& m = it->second;
    if (start + pair.window_len > m.num_frames) {
      std::ostringstream msg;
      msg << "window [" << start << ", " << start + pair.window_len
          << ") overruns stream " << id << " (" << m.num_frames << " frames)";
      throw Error(ErrorCode::kOutOfRange, msg.str());
    }
    Tensor window({pair.window_len, m.num_coeffs});
    std::copy(m.values.begin() + start * m.num_coeffs,
              m.values.begin() + (start + pair.window_len) * m.num_coeffs,
              window.data());
    return window;
  };
  ContrastivePair out;
  out.x1 = slice(pair.left_id, pair.left_start);
  out.x2 = slice(pair.right_id, pair.right_start);
  if (out.x1.shape() != out.x2.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "pair windows have different feature widths");
  }
  out.label = pair.label;
  return out;
}

MixedCorpus MixDialogs(const FeatureStore& features,
                       const std::vector<LabeledStream>& streams,
                       std::uint64_t seed) {
  if (streams.empty()) {
    throw Error(ErrorCode::kEmptyData, "no labeled streams to mix");
  }
  // Utterance pool grouped by speaker, in deterministic order.
  struct UttRef {
    std::size_t stream = 0;
    std::size_t segment = 0;
  };
  std::map<std::string, std::vector<UttRef>> by_speaker;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    const LabeledStream& stream = streams[s];
    ValidateSegments(stream.source_id, stream.segments);
    if (stream.segments.size() < 2) {
      throw Error(ErrorCode::kInsufficientUtterances,
                  "stream " + stream.source_id +
                      " has fewer than 2 utterances");
    }
    auto fit = features.find(stream.source_id);
    if (fit == features.end()) {
      throw Error(ErrorCode::kMissingFeatures,
                  "no features for stream " + stream.source_id);
    }
    if (fit->second.num_frames != stream.num_frames()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "stream " + stream.source_id +
                      ": segments cover " +
                      std::to_string(stream.num_frames()) + " frames but " +
                      "features have " +
                      std::to_string(fit->second.num_frames));
    }
    for (std::size_t i = 0; i < stream.segments.size(); ++i) {
      by_speaker[stream.segments[i].speaker_id].push_back(UttRef{s, i});
    }
  }
  if (by_speaker.size() < 2) {
    throw Error(ErrorCode::kInsufficientSpeakers,
                "mixing needs at least 2 distinct speakers, got " +
                    std::to_string(by_speaker.size()));
  }
  std::vector<std::string> speakers;
  speakers.reserve(by_speaker.size());
  for (const auto& [speaker, utts] : by_speaker) speakers.push_back(speaker);

  MixedCorpus out;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    const LabeledStream& stream = streams[s];
    const FeatureMatrix& feats = features.at(stream.source_id);
    Rng rng(MixSeed(seed, s));

    // Surviving half: even-indexed utterances.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < stream.segments.size(); i += 2) {
      kept.push_back(i);
    }

    FeatureMatrix mixed;
    mixed.source_id = stream.source_id + "_mix";
    mixed.num_coeffs = feats.num_coeffs;
    LabeledStream mixed_stream;
    mixed_stream.source_id = mixed.source_id;

    auto append = [&](const FeatureMatrix& src, const Segment& seg) {
      std::size_t start = mixed.num_frames;
      mixed.values.insert(
          mixed.values.end(), src.values.begin() + seg.start_frame * src.num_coeffs,
          src.values.begin() + seg.end_frame * src.num_coeffs);
      mixed.num_frames += seg.end_frame - seg.start_frame;
      mixed_stream.segments.push_back(
          Segment{seg.speaker_id, start, mixed.num_frames});
    };

    for (std::size_t k = 0; k < kept.size(); ++k) {
      const Segment& own = stream.segments[kept[k]];
      append(feats, own);

      // The inserted utterance must differ from both the utterance before
      // it and the kept utterance after it, so every junction is a change.
      std::set<std::string> excluded = {own.speaker_id};
      if (k + 1 < kept.size()) {
        excluded.insert(stream.segments[kept[k + 1]].speaker_id);
      }
      std::vector<const std::string*> eligible;
      for (const std::string& speaker : speakers) {
        if (!excluded.count(speaker)) eligible.push_back(&speaker);
      }
      if (eligible.empty()) {
        throw Error(ErrorCode::kInsufficientSpeakers,
                    "no speaker available to insert after an utterance of " +
                        own.speaker_id + " in stream " + stream.source_id);
      }
      const std::string& chosen =
          *eligible[rng.UniformBelow(eligible.size())];
      const std::vector<UttRef>& pool = by_speaker.at(chosen);
      const UttRef& ref = pool[rng.UniformBelow(pool.size())];
      const LabeledStream& src_stream = streams[ref.stream];
      append(features.at(src_stream.source_id),
             src_stream.segments[ref.segment]);
    }

    out.features.emplace(mixed.source_id, std::move(mixed));
    out.streams.push_back(std::move(mixed_stream));
  }
  return out;
}

NoiseReport MeasureLabelNoise(const std::vector<LabeledStream>& streams,
                              std::size_t d, std::size_t delta) {
  if (d < 1 || delta < 1) {
    throw Error(ErrorCode::kInvalidArgument, "d and delta must be >= 1");
  }
  NoiseReport report;
  for (const LabeledStream& stream : streams) {
    ValidateSegments(stream.source_id, stream.segments);
    std::vector<std::size_t> boundaries;
    for (std::size_t i = 1; i < stream.segments.size(); ++i) {
      if (stream.segments[i].speaker_id !=
          stream.segments[i - 1].speaker_id) {
        boundaries.push_back(stream.segments[i].start_frame);
      }
    }
    report.change_points += boundaries.size();
    std::size_t num_frames = stream.num_frames();
    if (num_frames < 2 * d) continue;
    for (std::size_t t = 0; t + 2 * d <= num_frames; t += delta) {
      ++report.genuine_pairs;
      // Corrupted iff some change point b satisfies t < b < t + 2d.
      auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
      if (it != boundaries.end() && *it < t + 2 * d) {
        ++report.corrupted_pairs;
      }
    }
  }
  report.corrupted_fraction =
      report.genuine_pairs == 0
          ? 0.0
          : static_cast<double>(report.corrupted_pairs) /
                static_cast<double>(report.genuine_pairs);
  return report;
}

void WritePairFile(const std::string& path, const std::vector<PairSpec>& pairs,
                   std::size_t d, std::size_t delta) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write pair file: " + path);
  }
  out << "# window_len=" << d << " shift=" << delta << '\n';
  for (const PairSpec& pair : pairs) {
    out << pair.left_id << '\t' << pair.left_start << '\t' << pair.right_id
        << '\t' << pair.right_start << '\t' << pair.label << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write: " + path);
  }
}

PairFile ReadPairFile(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "pair file not found: " + path);
  }
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open pair file: " + path);
  }
  PairFile file;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t w = line.find("window_len=");
      std::size_t h = line.find("shift=");
      if (w != std::string::npos) {
        file.window_len = std::stoull(line.substr(w + 11));
      }
      if (h != std::string::npos) {
        file.shift = std::stoull(line.substr(h + 6));
      }
      continue;
    }
    std::istringstream fields(line);
    PairSpec pair;
    std::string left_start, right_start, label;
    if (!std::getline(fields, pair.left_id, '\t') ||
        !std::getline(fields, left_start, '\t') ||
        !std::getline(fields, pair.right_id, '\t') ||
        !std::getline(fields, right_start, '\t') ||
        !std::getline(fields, label)) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_number) +
                      ": expected 5 tab-separated fields");
    }
    try {
      pair.left_start = std::stoull(left_start);
      pair.right_start = std::stoull(right_start);
      pair.label = std::stoi(label);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_number) +
                      ": bad numeric field");
    }
    if (pair.label != 0 && pair.label != 1) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_number) +
                      ": label must be 0 or 1");
    }
    pair.window_len = file.window_len;
    file.pairs.push_back(std::move(pair));
  }
  return file;
}

}  // namespace npc
