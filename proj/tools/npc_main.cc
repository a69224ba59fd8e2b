// tools/npc_main.cc

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

// Single binary exposing the pipeline as subcommands: features, pairs,
// mix, train, extract, eval-id, eval-verify, inspect.  Progress goes to
// standard error; machine-readable results go to files.  Every run writes
// its fully resolved configuration alongside its outputs so the run can be
// reproduced from that file alone.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "npc/checkpoint.h"
#include "npc/embedder.h"
#include "npc/error.h"
#include "npc/eval.h"
#include "npc/feature_io.h"
#include "npc/manifest.h"
#include "npc/mfcc.h"
#include "npc/model.h"
#include "npc/parallel.h"
#include "npc/sampler.h"
#include "npc/train.h"
#include "npc/wav.h"

namespace fs = std::filesystem;

namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string WithCommas(std::size_t n) {
  std::string s = std::to_string(n);
  for (int pos = static_cast<int>(s.size()) - 3; pos > 0; pos -= 3) {
    s.insert(static_cast<std::size_t>(pos), ",");
  }
  return s;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// The resolved configuration is the reproducibility contract: sorted
// key=value lines, written next to the command's outputs.
void WriteResolvedConfig(const fs::path& path, KeyValues kv) {
  std::sort(kv.begin(), kv.end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw npc::Error(npc::ErrorCode::kIoError,
                     "cannot write config: " + path.string());
  }
  for (const auto& [key, value] : kv) {
    out << key << '=' << value << '\n';
  }
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw npc::Error(npc::ErrorCode::kIoError,
                     "cannot create directory: " + dir);
  }
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Feature lookup order: cached file in --features, then a feature file
// named directly by the manifest, then MFCCs computed from the audio.
npc::FeatureMatrix LoadFeaturesFor(const npc::ManifestEntry& entry,
                                   const std::string& features_dir) {
  if (!features_dir.empty()) {
    fs::path cached = fs::path(features_dir) / (entry.source_id + ".npcf");
    if (fs::exists(cached)) {
      return npc::ReadFeatureFile(cached.string(), entry.source_id);
    }
  }
  if (EndsWith(entry.path, ".npcf")) {
    return npc::ReadFeatureFile(entry.path, entry.source_id);
  }
  return npc::ComputeMfcc(npc::LoadAudio(entry.path));
}

std::string SpeakerOf(const npc::ManifestEntry& entry) {
  if (entry.segments_path.empty()) {
    throw npc::Error(npc::ErrorCode::kInvalidArgument,
                     entry.source_id +
                         ": labeled manifest required (three columns)");
  }
  std::vector<npc::Segment> segments =
      npc::ReadSegmentsFile(entry.segments_path);
  if (segments.empty()) {
    throw npc::Error(npc::ErrorCode::kEmptyData,
                     entry.source_id + ": empty segments file");
  }
  for (const npc::Segment& seg : segments) {
    if (seg.speaker_id != segments[0].speaker_id) {
      throw npc::Error(npc::ErrorCode::kInvalidArgument,
                       entry.source_id +
                           ": utterance spans multiple speakers");
    }
  }
  return segments[0].speaker_id;
}

npc::LossKind ParseLoss(const std::string& name) {
  return name == "cosine" ? npc::LossKind::kCosine
                          : npc::LossKind::kCrossEntropy;
}

// ---------------------------------------------------------------------
// features

struct FeaturesArgs {
  std::string manifest, out;
  std::size_t workers = 0;
};

int RunFeatures(const FeaturesArgs& args) {
  npc::SetNumWorkers(args.workers);
  npc::Manifest manifest = npc::ReadManifest(args.manifest);
  EnsureDir(args.out);
  std::vector<std::string> failures;
  for (const npc::ManifestEntry& entry : manifest.entries) {
    fs::path dest = fs::path(args.out) / (entry.source_id + ".npcf");
    if (fs::exists(dest)) {
      std::cerr << entry.source_id << ": skipped (cached)\n";
      continue;
    }
    try {
      npc::AudioStream audio = npc::LoadAudio(entry.path);
      double duration = static_cast<double>(audio.samples.size()) /
                        static_cast<double>(audio.sample_rate);
      npc::FeatureMatrix features = npc::ComputeMfcc(audio);
      features.source_id = entry.source_id;
      npc::WriteFeatureFile(dest.string(), features);
      char line[160];
      std::snprintf(line, sizeof(line), "%s: T=%zu duration=%.2fs\n",
                    entry.source_id.c_str(), features.num_frames, duration);
      std::cerr << line;
    } catch (const npc::Error& e) {
      failures.push_back(args.manifest + ":" + std::to_string(entry.line_no) +
                         ": " + entry.source_id + ": " + e.what());
    }
  }
  WriteResolvedConfig(fs::path(args.out) / "features.config",
                      {{"manifest", args.manifest},
                       {"out", args.out},
                       {"workers", std::to_string(args.workers)}});
  for (const std::string& failure : failures) {
    std::cerr << "error: " << failure << "\n";
  }
  return failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------
// pairs

struct PairsArgs {
  std::string manifest, features, out;
  std::size_t d = 100, delta = 200;
  std::uint64_t seed = 0;
};

int RunPairs(const PairsArgs& args) {
  npc::Manifest manifest = npc::ReadManifest(args.manifest);
  std::vector<npc::StreamFrames> streams;
  std::vector<npc::PairSpec> genuine;
  npc::MfccConfig mfcc_config;
  for (const npc::ManifestEntry& entry : manifest.entries) {
    std::size_t frames = 0;
    fs::path cached;
    if (!args.features.empty()) {
      cached = fs::path(args.features) / (entry.source_id + ".npcf");
    }
    if (!cached.empty() && fs::exists(cached)) {
      frames = npc::ReadFeatureFileShape(cached.string()).first;
    } else if (EndsWith(entry.path, ".npcf")) {
      frames = npc::ReadFeatureFileShape(entry.path).first;
    } else {
      npc::AudioStream audio = npc::LoadAudio(entry.path);
      frames = npc::NumFrames(audio.samples.size(), mfcc_config);
    }
    streams.push_back({entry.source_id, frames});
    // Streams too short to host one pair contribute zero pairs instead of
    // aborting the whole corpus.
    if (frames < 2 * args.d) {
      std::cerr << entry.source_id << ": skipped (" << frames
                << " frames, need " << 2 * args.d << ")\n";
      continue;
    }
    std::vector<npc::PairSpec> mine = npc::GenerateGenuinePairs(
        entry.source_id, frames, args.d, args.delta);
    genuine.insert(genuine.end(), mine.begin(), mine.end());
  }
  std::vector<npc::PairSpec> impostor =
      npc::GenerateImpostorPairs(streams, genuine, args.seed);
  std::vector<npc::PairSpec> all = genuine;
  all.insert(all.end(), impostor.begin(), impostor.end());
  npc::WritePairFile(args.out, all, args.d, args.delta);
  std::cerr << "genuine: " << genuine.size() << "\n"
            << "impostor: " << impostor.size() << "\n";
  WriteResolvedConfig(args.out + ".config",
                      {{"manifest", args.manifest},
                       {"features", args.features},
                       {"out", args.out},
                       {"d", std::to_string(args.d)},
                       {"delta", std::to_string(args.delta)},
                       {"seed", std::to_string(args.seed)}});
  return 0;
}

// ---------------------------------------------------------------------
// mix

struct MixArgs {
  std::string manifest, features, out;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

int RunMix(const MixArgs& args) {
  npc::SetNumWorkers(args.workers);
  npc::Manifest manifest = npc::ReadManifest(args.manifest);
  npc::FeatureStore store;
  std::vector<npc::LabeledStream> streams;
  for (const npc::ManifestEntry& entry : manifest.entries) {
    if (entry.segments_path.empty()) {
      throw npc::Error(npc::ErrorCode::kInvalidArgument,
                       entry.source_id +
                           ": labeled manifest required (three columns)");
    }
    store[entry.source_id] = LoadFeaturesFor(entry, args.features);
    store[entry.source_id].source_id = entry.source_id;
    npc::LabeledStream stream;
    stream.source_id = entry.source_id;
    stream.segments = npc::ReadSegmentsFile(entry.segments_path);
    streams.push_back(std::move(stream));
  }
  npc::MixedCorpus mixed = npc::MixDialogs(store, streams, args.seed);
  EnsureDir(args.out);
  npc::Manifest out_manifest;
  for (const npc::LabeledStream& stream : mixed.streams) {
    fs::path feat_path = fs::path(args.out) / (stream.source_id + ".npcf");
    fs::path seg_path = fs::path(args.out) / (stream.source_id + ".segments");
    npc::WriteFeatureFile(feat_path.string(),
                          mixed.features.at(stream.source_id));
    npc::WriteSegmentsFile(seg_path.string(), stream.segments);
    out_manifest.entries.push_back({stream.source_id, feat_path.string(),
                                    seg_path.string(), 0});
    std::cerr << stream.source_id << ": utterances=" << stream.segments.size()
              << " frames=" << stream.num_frames() << "\n";
  }
  npc::WriteManifest((fs::path(args.out) / "mixed.manifest").string(),
                     out_manifest);
  WriteResolvedConfig(fs::path(args.out) / "mix.config",
                      {{"manifest", args.manifest},
                       {"features", args.features},
                       {"out", args.out},
                       {"seed", std::to_string(args.seed)},
                       {"workers", std::to_string(args.workers)}});
  return 0;
}

// ---------------------------------------------------------------------
// train

struct TrainArgs {
  std::string pairs, val_pairs, features, out;
  std::string loss = "xent";
  std::size_t batch = 128, epochs = 30, workers = 0;
  std::uint64_t seed = 0;
  double lr = 1e-4, weight_decay = 1e-6, stop_at_val_acc = 2.0;
  bool cosine_clamp = false;
};

npc::FeatureStore LoadStoreForPairs(const std::vector<npc::PairSpec>& pairs,
                                    const std::string& features_dir) {
  std::set<std::string> ids;
  for (const npc::PairSpec& pair : pairs) {
    ids.insert(pair.left_id);
    ids.insert(pair.right_id);
  }
  npc::FeatureStore store;
  for (const std::string& id : ids) {
    fs::path path = fs::path(features_dir) / (id + ".npcf");
    if (!fs::exists(path)) {
      throw npc::Error(npc::ErrorCode::kMissingFeatures,
                       id + ": no feature file " + path.string());
    }
    store[id] = npc::ReadFeatureFile(path.string(), id);
  }
  return store;
}

int RunTrain(const TrainArgs& args) {
  npc::SetNumWorkers(args.workers);
  npc::PairFile train_file = npc::ReadPairFile(args.pairs);
  std::vector<npc::PairSpec> val;
  if (!args.val_pairs.empty()) {
    npc::PairFile val_file = npc::ReadPairFile(args.val_pairs);
    if (val_file.window_len != train_file.window_len) {
      throw npc::Error(npc::ErrorCode::kShapeMismatch,
                       "train and validation pair files use different "
                       "window lengths");
    }
    val = std::move(val_file.pairs);
  }
  std::vector<npc::PairSpec> combined = train_file.pairs;
  combined.insert(combined.end(), val.begin(), val.end());
  npc::FeatureStore store = LoadStoreForPairs(combined, args.features);

  npc::ArchitectureSpec arch;
  arch.input_frames = train_file.window_len;
  arch.input_coeffs = store.begin()->second.num_coeffs;

  npc::TrainConfig config;
  config.loss = ParseLoss(args.loss);
  config.batch_size = args.batch;
  config.epochs = args.epochs;
  config.seed = args.seed;
  config.lr = args.lr;
  config.weight_decay = args.weight_decay;
  config.cosine_clamp = args.cosine_clamp;
  config.stop_at_val_accuracy = args.stop_at_val_acc;
  config.progress = [](std::size_t epoch, const npc::EpochStats& stats) {
    char line[160];
    std::snprintf(line, sizeof(line),
                  "epoch %zu: loss=%.6f train_acc=%.4f val_acc=%.4f\n", epoch,
                  stats.train_loss, stats.train_accuracy, stats.val_accuracy);
    std::cerr << line;
  };

  npc::TrainResult result =
      npc::Train(train_file.pairs, val, store, arch, config);

  EnsureDir(args.out);
  npc::SaveCheckpoint(result.params, &result.opt_state,
                      (fs::path(args.out) / "model.npck").string());
  {
    std::ofstream report(fs::path(args.out) / "train_report.txt",
                         std::ios::trunc);
    report << "# epoch,train_loss,train_accuracy,val_accuracy\n";
    for (std::size_t e = 0; e < result.report.epochs.size(); ++e) {
      const npc::EpochStats& s = result.report.epochs[e];
      report << e << ',' << Num(s.train_loss) << ',' << Num(s.train_accuracy)
             << ',' << Num(s.val_accuracy) << '\n';
    }
    report << "best_epoch=" << result.report.best_epoch << '\n';
  }
  WriteResolvedConfig(
      fs::path(args.out) / "train.config",
      {{"pairs", args.pairs},
       {"val-pairs", args.val_pairs},
       {"features", args.features},
       {"out", args.out},
       {"loss", args.loss},
       {"batch", std::to_string(args.batch)},
       {"epochs", std::to_string(args.epochs)},
       {"seed", std::to_string(args.seed)},
       {"lr", Num(args.lr)},
       {"weight-decay", Num(args.weight_decay)},
       {"stop-at-val-acc", Num(args.stop_at_val_acc)},
       {"cosine-clamp", args.cosine_clamp ? "1" : "0"},
       {"workers", std::to_string(args.workers)}});
  return 0;
}

// ---------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::string checkpoint, manifest, features, out;
  std::size_t stride = 1, workers = 0;
};

int RunExtract(const ExtractArgs& args) {
  npc::SetNumWorkers(args.workers);
  npc::Checkpoint ckpt = npc::LoadCheckpoint(args.checkpoint);
  npc::Manifest manifest = npc::ReadManifest(args.manifest);
  EnsureDir(args.out);
  for (const npc::ManifestEntry& entry : manifest.entries) {
    npc::FeatureMatrix features = LoadFeaturesFor(entry, args.features);
    features.source_id = entry.source_id;
    npc::FeatureMatrix embeddings =
        npc::ExtractEmbeddings(features, &ckpt.params, args.stride);
    fs::path dest = fs::path(args.out) / (entry.source_id + ".npce");
    npc::WriteEmbeddingFile(dest.string(), embeddings);
    std::cerr << entry.source_id << ": rows=" << embeddings.num_frames
              << "\n";
  }
  WriteResolvedConfig(fs::path(args.out) / "extract.config",
                      {{"checkpoint", args.checkpoint},
                       {"manifest", args.manifest},
                       {"features", args.features},
                       {"out", args.out},
                       {"stride", std::to_string(args.stride)},
                       {"workers", std::to_string(args.workers)}});
  return 0;
}

// ---------------------------------------------------------------------
// eval-id

struct EvalIdArgs {
  std::string manifest, features, checkpoint, out;
  std::string feature_type = "embedding";  // embedding | stats | mfcc
  std::string mode = "frame";              // frame | utterance
  std::vector<std::size_t> enroll_counts = {1, 2, 5};
  std::size_t repeats = 0;  // 0 = default for the mode
  std::size_t heldout = 5;
  std::size_t max_query_frames = 2000;
  std::size_t stats_window = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

std::vector<npc::UtteranceFeatures> BuildIdCorpus(const EvalIdArgs& args) {
  npc::Manifest manifest = npc::ReadManifest(args.manifest);
  std::optional<npc::Checkpoint> ckpt;
  if (args.feature_type == "embedding") {
    if (args.checkpoint.empty()) {
      throw npc::Error(npc::ErrorCode::kInvalidArgument,
                       "--checkpoint is required for embedding features");
    }
    ckpt = npc::LoadCheckpoint(args.checkpoint);
  }
  std::vector<npc::UtteranceFeatures> corpus;
  for (const npc::ManifestEntry& entry : manifest.entries) {
    npc::UtteranceFeatures utt;
    utt.utterance_id = entry.source_id;
    utt.speaker_id = SpeakerOf(entry);
    npc::FeatureMatrix mfcc = LoadFeaturesFor(entry, args.features);
    mfcc.source_id = entry.source_id;
    if (args.feature_type == "embedding") {
      utt.frames = npc::ExtractEmbeddings(mfcc, &ckpt->params);
    } else if (args.feature_type == "stats") {
      utt.frames = npc::MfccStatsStream(mfcc, args.stats_window);
    } else {
      utt.frames = std::move(mfcc);
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

int RunEvalId(const EvalIdArgs& args) {
  npc::SetNumWorkers(args.workers);
  std::vector<npc::UtteranceFeatures> corpus = BuildIdCorpus(args);
  std::size_t repeats =
      args.repeats != 0 ? args.repeats : (args.mode == "utterance" ? 20 : 5);
  std::vector<npc::AccuracyCell> cells =
      args.mode == "utterance"
          ? npc::UtteranceIdExperiment(corpus, args.enroll_counts, repeats,
                                       args.heldout, args.seed)
          : npc::FrameIdExperiment(corpus, args.enroll_counts, repeats,
                                   args.heldout, args.seed,
                                   args.max_query_frames);

  EnsureDir(args.out);
  {
    std::ofstream report(fs::path(args.out) / "eval_id_report.txt",
                         std::ios::trunc);
    report << "mode=" << args.mode << "\n"
           << "feature_type=" << args.feature_type << "\n"
           << "repeats=" << repeats << "\n"
           << "heldout_per_speaker=" << args.heldout << "\n";
    for (const npc::AccuracyCell& cell : cells) {
      report << "enroll=" << cell.enroll_count
             << " mean_accuracy=" << Num(cell.mean_accuracy) << " repeats:";
      for (double a : cell.per_repeat) report << ' ' << Num(a);
      report << '\n';
    }
  }
  {
    std::ofstream csv(fs::path(args.out) / "eval_id_table.csv",
                      std::ios::trunc);
    csv << "enroll_count,mean_accuracy\n";
    for (const npc::AccuracyCell& cell : cells) {
      csv << cell.enroll_count << ',' << Num(cell.mean_accuracy) << '\n';
    }
  }
  for (const npc::AccuracyCell& cell : cells) {
    char line[96];
    std::snprintf(line, sizeof(line), "enroll=%zu: accuracy=%.4f\n",
                  cell.enroll_count, cell.mean_accuracy);
    std::cerr << line;
  }

  std::string counts;
  for (std::size_t i = 0; i < args.enroll_counts.size(); ++i) {
    if (i) counts += ',';
    counts += std::to_string(args.enroll_counts[i]);
  }
  WriteResolvedConfig(fs::path(args.out) / "eval-id.config",
                      {{"manifest", args.manifest},
                       {"features", args.features},
                       {"checkpoint", args.checkpoint},
                       {"out", args.out},
                       {"feature-type", args.feature_type},
                       {"mode", args.mode},
                       {"enroll-counts", counts},
                       {"repeats", std::to_string(repeats)},
                       {"heldout", std::to_string(args.heldout)},
                       {"max-query-frames",
                        std::to_string(args.max_query_frames)},
                       {"stats-window", std::to_string(args.stats_window)},
                       {"seed", std::to_string(args.seed)},
                       {"workers", std::to_string(args.workers)}});
  return 0;
}

// ---------------------------------------------------------------------
// eval-verify

struct EvalVerifyArgs {
  std::string manifest, trials, features, checkpoint, out;
  std::string feature_type = "embedding";
  std::size_t stats_window = 100;
  double p_target = 0.01;
  std::size_t workers = 0;
};

int RunEvalVerify(const EvalVerifyArgs& args) {
  npc::SetNumWorkers(args.workers);
  npc::Manifest manifest = npc::ReadManifest(args.manifest);
  std::optional<npc::Checkpoint> ckpt;
  if (args.feature_type == "embedding") {
    if (args.checkpoint.empty()) {
      throw npc::Error(npc::ErrorCode::kInvalidArgument,
                       "--checkpoint is required for embedding features");
    }
    ckpt = npc::LoadCheckpoint(args.checkpoint);
  }

  std::map<std::string, std::vector<double>> vectors;
  for (const npc::ManifestEntry& entry : manifest.entries) {
    npc::FeatureMatrix mfcc = LoadFeaturesFor(entry, args.features);
    mfcc.source_id = entry.source_id;
    npc::FeatureMatrix frames;
    if (args.feature_type == "embedding") {
      frames = npc::ExtractEmbeddings(mfcc, &ckpt->params);
    } else if (args.feature_type == "stats") {
      frames = npc::MfccStatsStream(mfcc, args.stats_window);
    } else {
      frames = std::move(mfcc);
    }
    vectors[entry.source_id] = npc::PoolUtterance(frames);
  }

  std::vector<npc::Trial> trials = npc::ReadTrialFile(args.trials);
  std::vector<double> scores = npc::ScoreTrials(trials, vectors);
  std::vector<bool> targets;
  targets.reserve(trials.size());
  std::size_t n_target = 0;
  for (const npc::Trial& trial : trials) {
    targets.push_back(trial.target);
    if (trial.target) ++n_target;
  }
  npc::EerResult eer = npc::ComputeEer(scores, targets);
  double min_dcf = npc::ComputeMinDcf(scores, targets, args.p_target);

  EnsureDir(args.out);
  {
    std::ofstream report(fs::path(args.out) / "eval_verify_report.txt",
                         std::ios::trunc);
    report << "trials=" << trials.size() << "\n"
           << "targets=" << n_target << "\n"
           << "nontargets=" << trials.size() - n_target << "\n"
           << "feature_type=" << args.feature_type << "\n"
           << "eer=" << Num(eer.eer) << "\n"
           << "threshold=" << Num(eer.threshold) << "\n"
           << "min_dcf=" << Num(min_dcf) << "\n"
           << "p_target=" << Num(args.p_target) << "\n";
  }
  {
    std::ofstream csv(fs::path(args.out) / "trial_scores.csv",
                      std::ios::trunc);
    csv << "utt_a,utt_b,kind,score\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
      csv << trials[i].id_a << ',' << trials[i].id_b << ','
          << (trials[i].target ? "target" : "nontarget") << ','
          << Num(scores[i]) << '\n';
    }
  }
  char line[96];
  std::snprintf(line, sizeof(line), "eer=%.4f min_dcf=%.4f\n", eer.eer,
                min_dcf);
  std::cerr << line;

  WriteResolvedConfig(fs::path(args.out) / "eval-verify.config",
                      {{"manifest", args.manifest},
                       {"trials", args.trials},
                       {"features", args.features},
                       {"checkpoint", args.checkpoint},
                       {"out", args.out},
                       {"feature-type", args.feature_type},
                       {"stats-window", std::to_string(args.stats_window)},
                       {"p-target", Num(args.p_target)},
                       {"workers", std::to_string(args.workers)}});
  return 0;
}

// ---------------------------------------------------------------------
// inspect

struct InspectArgs {
  std::string checkpoint;
};

int RunInspect(const InspectArgs& args) {
  npc::ModelParams params;
  if (args.checkpoint.empty()) {
    params = npc::BuildModel(npc::ArchitectureSpec{}, 0);
  } else {
    params = npc::LoadCheckpoint(args.checkpoint).params;
  }
  const npc::ArchitectureSpec& spec = params.spec;
  std::vector<npc::LayerShape> chain = npc::ActivationChain(spec);

  std::cout << "input: " << spec.input_frames << "×" << spec.input_coeffs
            << "\n";
  std::cout << "chain: ";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) std::cout << " → ";
    std::cout << chain[i].height << "×" << chain[i].width;
  }
  std::cout << "\n";
  for (std::size_t i = 0, c = 0; i < spec.convs.size(); ++i) {
    std::cout << "conv" << i << ": k=" << spec.convs[i].kernel << " "
              << chain[c].channels << "@" << chain[c].height << "×"
              << chain[c].width << "\n";
    ++c;
    if (npc::PoolAfterConv(i)) {
      std::cout << "pool" << i << ": " << chain[c].channels << "@"
                << chain[c].height << "×" << chain[c].width << "\n";
      ++c;
    }
  }
  std::size_t count = npc::CountParameters(spec);
  std::cout << "flatten: " << npc::FlattenLength(spec) << "\n";
  std::cout << "embedding: " << spec.embedding_dim << "\n";
  std::cout << "parameters: " << count << " (" << WithCommas(count) << ")\n";
  std::cout << "loss: "
            << (params.trained_loss == npc::LossKind::kCosine ? "cosine"
                                                              : "xent")
            << "\n";
  if (params.trained_loss == npc::LossKind::kCrossEntropy) {
    npc::MirrorStats stats = npc::WeightMirrorStats(params);
    std::cout << "mirror.mean_abs_sum: " << Num(stats.mean_abs_sum) << "\n";
    std::cout << "mirror.std_abs_sum: " << Num(stats.std_abs_sum) << "\n";
    std::cout << "mirror.cosine: " << Num(stats.cosine) << "\n";
    std::cout << "mirror.b1: " << Num(stats.b1) << "\n";
    std::cout << "mirror.b2: " << Num(stats.b2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised speaker embeddings from unlabeled audio"};
  app.require_subcommand(1);

  FeaturesArgs features_args;
  CLI::App* features = app.add_subcommand(
      "features", "Compute MFCC feature files from a WAV manifest");
  features->add_option("--manifest", features_args.manifest, "Stream manifest")
      ->required();
  features->add_option("--out", features_args.out, "Output directory")
      ->required();
  features->add_option("--workers", features_args.workers,
                       "Worker threads (0 = cores)");
  features->set_config("--config");

  PairsArgs pairs_args;
  CLI::App* pairs = app.add_subcommand(
      "pairs", "Sample genuine and impostor pairs from a manifest");
  pairs->add_option("--manifest", pairs_args.manifest, "Stream manifest")
      ->required();
  pairs->add_option("--features", pairs_args.features,
                    "Feature cache directory (else extents come from audio)");
  pairs->add_option("--out", pairs_args.out, "Output pair file")->required();
  pairs->add_option("--d", pairs_args.d, "Window length in frames");
  pairs->add_option("--delta", pairs_args.delta, "Genuine-pair shift");
  pairs->add_option("--seed", pairs_args.seed, "Impostor sampling seed");
  pairs->set_config("--config");

  MixArgs mix_args;
  CLI::App* mix = app.add_subcommand(
      "mix", "Synthesize mixed-speaker dialog streams from labeled audio");
  mix->add_option("--manifest", mix_args.manifest, "Labeled manifest")
      ->required();
  mix->add_option("--features", mix_args.features, "Feature cache directory");
  mix->add_option("--out", mix_args.out, "Output directory")->required();
  mix->add_option("--seed", mix_args.seed, "Mixing seed");
  mix->add_option("--workers", mix_args.workers, "Worker threads (0 = cores)");
  mix->set_config("--config");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train", "Train the siamese model on a pair file");
  train->add_option("--pairs", train_args.pairs, "Training pair file")
      ->required();
  train->add_option("--val-pairs", train_args.val_pairs,
                    "Validation pair file");
  train->add_option("--features", train_args.features,
                    "Feature cache directory")
      ->required();
  train->add_option("--out", train_args.out, "Output directory")->required();
  train->add_option("--loss", train_args.loss, "Loss kind")
      ->check(CLI::IsMember({"xent", "cosine"}));
  train->add_option("--batch", train_args.batch, "Pairs per batch");
  train->add_option("--epochs", train_args.epochs, "Epoch count");
  train->add_option("--seed", train_args.seed, "Init and shuffle seed");
  train->add_option("--lr", train_args.lr, "Learning rate");
  train->add_option("--weight-decay", train_args.weight_decay, "Weight decay");
  train->add_option("--stop-at-val-acc", train_args.stop_at_val_acc,
                    "Early stop once validation accuracy reaches this");
  train->add_flag("--cosine-clamp", train_args.cosine_clamp,
                  "Clamp impostor cosine loss at zero");
  train->add_option("--workers", train_args.workers,
                    "Worker threads (0 = cores)");
  train->set_config("--config");

  ExtractArgs extract_args;
  CLI::App* extract = app.add_subcommand(
      "extract", "Extract sliding-window embeddings for manifest streams");
  extract->add_option("--checkpoint", extract_args.checkpoint,
                      "Model checkpoint")
      ->required();
  extract->add_option("--manifest", extract_args.manifest, "Stream manifest")
      ->required();
  extract->add_option("--features", extract_args.features,
                      "Feature cache directory");
  extract->add_option("--out", extract_args.out, "Output directory")
      ->required();
  extract->add_option("--stride", extract_args.stride, "Window stride");
  extract->add_option("--workers", extract_args.workers,
                      "Worker threads (0 = cores)");
  extract->set_config("--config");

  EvalIdArgs eval_id_args;
  CLI::App* eval_id = app.add_subcommand(
      "eval-id", "1-NN speaker identification experiments");
  eval_id->add_option("--manifest", eval_id_args.manifest, "Labeled manifest")
      ->required();
  eval_id->add_option("--features", eval_id_args.features,
                      "Feature cache directory");
  eval_id->add_option("--checkpoint", eval_id_args.checkpoint,
                      "Model checkpoint (embedding features)");
  eval_id->add_option("--feature-type", eval_id_args.feature_type,
                      "Feature type")
      ->check(CLI::IsMember({"embedding", "stats", "mfcc"}));
  eval_id->add_option("--mode", eval_id_args.mode, "Experiment granularity")
      ->check(CLI::IsMember({"frame", "utterance"}));
  eval_id->add_option("--enroll-counts", eval_id_args.enroll_counts,
                      "Enrollment utterances per speaker")
      ->delimiter(',');
  eval_id->add_option("--repeats", eval_id_args.repeats,
                      "Repeats (0 = mode default: frame 5, utterance 20)");
  eval_id->add_option("--heldout", eval_id_args.heldout,
                      "Held-out utterances per speaker");
  eval_id->add_option("--max-query-frames", eval_id_args.max_query_frames,
                      "Query frame cap per utterance");
  eval_id->add_option("--stats-window", eval_id_args.stats_window,
                      "MFCC-stats window");
  eval_id->add_option("--seed", eval_id_args.seed, "Split seed");
  eval_id->add_option("--out", eval_id_args.out, "Output directory")
      ->required();
  eval_id->add_option("--workers", eval_id_args.workers,
                      "Worker threads (0 = cores)");
  eval_id->set_config("--config");

  EvalVerifyArgs eval_verify_args;
  CLI::App* eval_verify = app.add_subcommand(
      "eval-verify", "Score verification trials and report EER / minDCF");
  eval_verify
      ->add_option("--manifest", eval_verify_args.manifest,
                   "Utterance manifest")
      ->required();
  eval_verify->add_option("--trials", eval_verify_args.trials, "Trial file")
      ->required();
  eval_verify->add_option("--features", eval_verify_args.features,
                          "Feature cache directory");
  eval_verify->add_option("--checkpoint", eval_verify_args.checkpoint,
                          "Model checkpoint (embedding features)");
  eval_verify
      ->add_option("--feature-type", eval_verify_args.feature_type,
                   "Feature type")
      ->check(CLI::IsMember({"embedding", "stats", "mfcc"}));
  eval_verify->add_option("--stats-window", eval_verify_args.stats_window,
                          "MFCC-stats window");
  eval_verify->add_option("--p-target", eval_verify_args.p_target,
                          "Target prior for minDCF");
  eval_verify->add_option("--out", eval_verify_args.out, "Output directory")
      ->required();
  eval_verify->add_option("--workers", eval_verify_args.workers,
                          "Worker threads (0 = cores)");
  eval_verify->set_config("--config");

  InspectArgs inspect_args;
  CLI::App* inspect = app.add_subcommand(
      "inspect", "Print the model's shape ledger and head statistics");
  inspect->add_option("--checkpoint", inspect_args.checkpoint,
                      "Model checkpoint (omit for a fresh default model)");
  inspect->set_config("--config");

  int rc = 0;
  features->callback([&]() { rc = RunFeatures(features_args); });
  pairs->callback([&]() { rc = RunPairs(pairs_args); });
  mix->callback([&]() { rc = RunMix(mix_args); });
  train->callback([&]() { rc = RunTrain(train_args); });
  extract->callback([&]() { rc = RunExtract(extract_args); });
  eval_id->callback([&]() { rc = RunEvalId(eval_id_args); });
  eval_verify->callback([&]() { rc = RunEvalVerify(eval_verify_args); });
  inspect->callback([&]() { rc = RunInspect(inspect_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const npc::Error& e) {
    std::cerr << "error: " << npc::ErrorCodeName(e.code()) << ": " << e.what()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
