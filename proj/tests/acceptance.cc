// tests/acceptance.cc

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

// End-to-end acceptance harness: ten independent criteria covering the
// architecture, the numeric core, the sampler, desk-scale learning, the
// evaluation metrics, and command-line reproducibility.  Each criterion
// prints exactly one PASS or FAIL line; the process exits nonzero when
// any criterion fails.  Unlike the unit suite, every oracle here is
// recomputed locally so a regression in the library cannot hide behind a
// shared helper.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npc/embedder.h"
#include "npc/error.h"
#include "npc/eval.h"
#include "npc/layers.h"
#include "npc/manifest.h"
#include "npc/mfcc.h"
#include "npc/model.h"
#include "npc/parallel.h"
#include "npc/rng.h"
#include "npc/sampler.h"
#include "npc/train.h"
#include "npc/wav.h"
#include "test_support.h"

namespace fs = std::filesystem;
using npc::ArchitectureSpec;
using npc::LossKind;
using npc::ModelParams;
using npc::Tensor;
using npc_test::CentralDiff;
using npc_test::FillUniform;
using npc_test::RelError;
using npc_test::TempDir;
using npc_test::TinyArch;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::string Fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return std::string(buffer);
}

// One criterion's outcome: the first failure wins; a success note may
// annotate the line with measured values.
struct Line {
  bool ok = true;
  std::string detail;

  void Fail(const std::string& what) {
    if (ok) {
      ok = false;
      detail = what;
    }
  }
  void Require(bool condition, const std::string& what) {
    if (!condition) Fail(what);
  }
  void Note(const std::string& info) {
    if (ok) detail = info;
  }
};

bool RunCriterion(int index, const std::string& name,
                  const std::function<void(Line*)>& body) {
  Line line;
  try {
    body(&line);
  } catch (const npc::Error& e) {
    line.Fail(std::string("threw ") + e.what());
  } catch (const std::exception& e) {
    line.Fail(std::string("threw ") + e.what());
  }
  std::printf("[%s] %2d %s%s%s\n", line.ok ? "PASS" : "FAIL", index,
              name.c_str(), line.detail.empty() ? "" : ": ",
              line.detail.c_str());
  std::fflush(stdout);
  return line.ok;
}

// ---------------------------------------------------------------------
// Shared numeric helpers (independent re-implementations).

double WeightedSum(const Tensor& values, const Tensor& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i] * weights[i];
  }
  return acc;
}

// A finite-difference step that straddles a LeakyReLU or |x| kink is wrong
// at any single step size; a genuine gradient bug stays wrong as the step
// shrinks.  Escalate to smaller steps only when the first disagrees.
double FdRelError(const std::function<double()>& loss, double* slot,
                  double analytic) {
  double rel = RelError(analytic, CentralDiff(loss, slot));
  if (rel >= 1e-4) {
    rel = std::min(rel, RelError(analytic, CentralDiff(loss, slot, 1e-6)));
  }
  if (rel >= 1e-4) {
    rel = std::min(rel, RelError(analytic, CentralDiff(loss, slot, 1e-7)));
  }
  return rel;
}

// Random batch of B pairs laid out [all x1 | all x2] as the trunk expects.
Tensor PairBatch(const ArchitectureSpec& spec, std::size_t pairs,
                 npc::Rng* rng) {
  Tensor windows({2 * pairs, 1, spec.input_frames, spec.input_coeffs});
  FillUniform(&windows, rng, -1.5, 1.5);
  return windows;
}

std::vector<int> AlternatingLabels(std::size_t pairs) {
  std::vector<int> labels(pairs);
  for (std::size_t i = 0; i < pairs; ++i) labels[i] = i % 2;
  return labels;
}

Tensor SwapHalves(const Tensor& windows) {
  Tensor swapped(windows.shape());
  std::size_t half = windows.size() / 2;
  std::memcpy(swapped.data(), windows.data() + half, half * sizeof(double));
  std::memcpy(swapped.data() + half, windows.data(), half * sizeof(double));
  return swapped;
}

// ---------------------------------------------------------------------
// Brute-force verification metrics (direct counting, no shared code with
// the library implementation).

std::vector<double> NaiveCandidates(std::vector<double> scores) {
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> candidates;
  candidates.push_back(scores.front() - 1.0);
  for (std::size_t i = 0; i + 1 < scores.size(); ++i) {
    candidates.push_back(0.5 * (scores[i] + scores[i + 1]));
  }
  candidates.push_back(scores.back() + 1.0);
  return candidates;
}

double NaiveFrr(const std::vector<double>& scores,
                const std::vector<bool>& targets, double thr) {
  std::size_t miss = 0, total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!targets[i]) continue;
    ++total;
    if (scores[i] < thr) ++miss;
  }
  return static_cast<double>(miss) / static_cast<double>(total);
}

double NaiveFar(const std::vector<double>& scores,
                const std::vector<bool>& targets, double thr) {
  std::size_t accept = 0, total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (targets[i]) continue;
    ++total;
    if (scores[i] >= thr) ++accept;
  }
  return static_cast<double>(accept) / static_cast<double>(total);
}

double NaiveEer(const std::vector<double>& scores,
                const std::vector<bool>& targets) {
  std::vector<double> candidates = NaiveCandidates(scores);
  double prev_far = NaiveFar(scores, targets, candidates[0]);
  double prev_diff = prev_far - NaiveFrr(scores, targets, candidates[0]);
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    double far = NaiveFar(scores, targets, candidates[j]);
    double diff = far - NaiveFrr(scores, targets, candidates[j]);
    if (diff <= 0.0) {
      double alpha = prev_diff / (prev_diff - diff);
      return prev_far + alpha * (far - prev_far);
    }
    prev_far = far;
    prev_diff = diff;
  }
  return -1.0;  // unreachable for non-degenerate inputs
}

double NaiveDcf(const std::vector<double>& scores,
                const std::vector<bool>& targets, double p_target,
                double c_miss, double c_fa) {
  double best = std::numeric_limits<double>::infinity();
  for (double thr : NaiveCandidates(scores)) {
    double cost = c_miss * p_target * NaiveFrr(scores, targets, thr) +
                  c_fa * (1.0 - p_target) * NaiveFar(scores, targets, thr);
    best = std::min(best, cost);
  }
  return best / std::min(c_miss * p_target, c_fa * (1.0 - p_target));
}

// Random trial set: Gaussian targets shifted up by a random margin, with
// optional quantization so exact score ties occur across both classes.
void RandomScoreSet(npc::Rng* rng, std::vector<double>* scores,
                    std::vector<bool>* targets) {
  std::size_t n_tgt = 1 + rng->UniformBelow(40);
  std::size_t n_non = 1 + rng->UniformBelow(40);
  double margin = rng->UniformReal(-1.0, 3.0);
  bool quantize = rng->UniformBelow(2) == 0;
  scores->clear();
  targets->clear();
  for (std::size_t i = 0; i < n_tgt + n_non; ++i) {
    bool target = i < n_tgt;
    double s = rng->Normal() + (target ? margin : 0.0);
    if (quantize) s = std::round(s * 2.0) / 2.0;
    scores->push_back(s);
    targets->push_back(target);
  }
}

// ---------------------------------------------------------------------
// File utilities for the command-line criterion.

std::vector<std::uint8_t> ReadAllBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

bool SameFileBytes(const fs::path& a, const fs::path& b, Line* line) {
  std::vector<std::uint8_t> bytes_a = ReadAllBytes(a.string());
  std::vector<std::uint8_t> bytes_b = ReadAllBytes(b.string());
  line->Require(!bytes_a.empty(), a.filename().string() + " is empty");
  line->Require(bytes_a == bytes_b,
                a.filename().string() + " differs between identical runs");
  return bytes_a == bytes_b;
}

void SameDirBytes(const fs::path& a, const fs::path& b, Line* line) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.is_regular_file()) names.push_back(entry.path().filename());
  }
  std::sort(names.begin(), names.end());
  line->Require(!names.empty(), a.string() + " produced no files");
  for (const std::string& name : names) {
    line->Require(fs::exists(b / name), name + " missing from rerun");
    if (fs::exists(b / name)) SameFileBytes(a / name, b / name, line);
  }
}

int RunCli(const std::string& args, const std::string& log) {
  std::string command =
      std::string(NPC_CLI_PATH) + " " + args + " 2>>" + log;
  return std::system(command.c_str());
}

// ---------------------------------------------------------------------
// Criterion bodies.

void Criterion1Architecture(Line* line) {
  ArchitectureSpec spec;  // default 100-frame, 40-coefficient window
  std::vector<npc::LayerShape> chain = npc::ActivationChain(spec);
  const std::size_t expected[6][3] = {{16, 94, 34}, {32, 90, 30},
                                      {32, 45, 15}, {32, 42, 12},
                                      {32, 40, 10}, {32, 20, 5}};
  line->Require(chain.size() == 6,
                Fmt("chain has %zu stages, expected 6", chain.size()));
  for (std::size_t i = 0; i < chain.size() && i < 6; ++i) {
    line->Require(chain[i].channels == expected[i][0] &&
                      chain[i].height == expected[i][1] &&
                      chain[i].width == expected[i][2],
                  Fmt("stage %zu is %zux%zux%zu, expected %zux%zux%zu", i,
                      chain[i].channels, chain[i].height, chain[i].width,
                      expected[i][0], expected[i][1], expected[i][2]));
  }
  line->Require(npc::FlattenLength(spec) == 3200,
                Fmt("flatten length %zu != 3200", npc::FlattenLength(spec)));
  ModelParams params = npc::BuildModel(spec, 1);
  line->Require(params.embed_w.shape() == std::vector<std::size_t>{512, 3200},
                "embedding dense layer is not 3200->512");
  line->Note("terminal map 32x20x5, flatten 3200, dense 3200->512");
}

void Criterion2Parameters(Line* line) {
  std::size_t count = npc::CountParameters(ArchitectureSpec{});
  line->Require(count >= 1600000 && count <= 2000000,
                Fmt("%zu outside [1.6M, 2.0M]", count));
  line->Require(count == 1680482, Fmt("%zu != 1680482", count));
  line->Note(Fmt("%zu learnable parameters", count));
}

void Criterion3Gradients(Line* line) {
  // Layer-level: every primitive against central differences, 20 seeds
  // each, full coordinate sweeps, numeric-core tolerances.
  for (std::uint64_t seed = 500; seed < 520 && line->ok; ++seed) {
    npc::Rng rng(seed);
    Tensor input({1, 2, 8, 8}), kernels({3, 2, 3, 3}), bias({3});
    FillUniform(&input, &rng);
    FillUniform(&kernels, &rng);
    FillUniform(&bias, &rng);
    Tensor weights({1, 3, 6, 6});
    FillUniform(&weights, &rng);
    Tensor grad_input, grad_kernels, grad_bias;
    npc::Conv2dBackward(input, kernels, weights, &grad_input, &grad_kernels,
                        &grad_bias);
    auto loss = [&] {
      return WeightedSum(npc::Conv2dForward(input, kernels, bias), weights);
    };
    Tensor* tensors[3] = {&input, &kernels, &bias};
    Tensor* grads[3] = {&grad_input, &grad_kernels, &grad_bias};
    for (int t = 0; t < 3; ++t) {
      for (std::size_t i = 0; i < tensors[t]->size(); ++i) {
        double fd = CentralDiff(loss, tensors[t]->data() + i);
        line->Require(RelError((*grads[t])[i], fd) <= 1e-6,
                      Fmt("conv2d grad %d rel %g at seed %llu", t,
                          RelError((*grads[t])[i], fd),
                          static_cast<unsigned long long>(seed)));
      }
    }
  }
  for (std::uint64_t seed = 600; seed < 620 && line->ok; ++seed) {
    npc::Rng rng(seed);
    // Distinct values with gaps far wider than the probe step, so the
    // pooling choice is stable under finite differences.
    Tensor input({2, 2, 6, 4});
    std::vector<double> levels(input.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      levels[i] = static_cast<double>(i) * 0.01;
    }
    rng.Shuffle(&levels);
    for (std::size_t i = 0; i < input.size(); ++i) input[i] = levels[i];
    npc::PoolResult pooled = npc::MaxPool2x2Forward(input);
    Tensor weights(pooled.output.shape());
    FillUniform(&weights, &rng);
    Tensor grad_input =
        npc::MaxPool2x2Backward(input.shape(), pooled.argmax, weights);
    auto loss = [&] {
      return WeightedSum(npc::MaxPool2x2Forward(input).output, weights);
    };
    for (std::size_t i = 0; i < input.size(); ++i) {
      double fd = CentralDiff(loss, input.data() + i);
      line->Require(RelError(grad_input[i], fd) <= 1e-6,
                    Fmt("maxpool grad rel %g at seed %llu",
                        RelError(grad_input[i], fd),
                        static_cast<unsigned long long>(seed)));
    }
  }
  for (std::uint64_t seed = 700; seed < 720 && line->ok; ++seed) {
    npc::Rng rng(seed);
    Tensor input({8, 5}), gamma({5}), beta({5}), weights({8, 5});
    FillUniform(&input, &rng, -2.0, 2.0);
    FillUniform(&gamma, &rng, 0.5, 1.5);
    FillUniform(&beta, &rng, -1.0, 1.0);
    FillUniform(&weights, &rng);
    npc::BatchNormCache cache;
    Tensor rm({5}), rv({5});
    rv.Fill(1.0);
    npc::BatchNormForward(input, gamma, beta, true, &rm, &rv, 0.9, 1e-5,
                          &cache);
    Tensor grad_gamma({5}), grad_beta({5});
    Tensor grad_input =
        npc::BatchNormBackward(cache, gamma, weights, &grad_gamma, &grad_beta);
    auto loss = [&] {
      Tensor m({5}), v({5});
      v.Fill(1.0);
      return WeightedSum(npc::BatchNormForward(input, gamma, beta, true, &m,
                                               &v, 0.9, 1e-5, nullptr),
                         weights);
    };
    Tensor* tensors[3] = {&input, &gamma, &beta};
    Tensor* grads[3] = {&grad_input, &grad_gamma, &grad_beta};
    for (int t = 0; t < 3; ++t) {
      for (std::size_t i = 0; i < tensors[t]->size(); ++i) {
        double fd = CentralDiff(loss, tensors[t]->data() + i);
        line->Require(RelError((*grads[t])[i], fd) <= 1e-5,
                      Fmt("batchnorm grad %d rel %g at seed %llu", t,
                          RelError((*grads[t])[i], fd),
                          static_cast<unsigned long long>(seed)));
      }
    }
  }
  for (std::uint64_t seed = 800; seed < 820 && line->ok; ++seed) {
    npc::Rng rng(seed);
    Tensor input({50}), weights({50});
    for (std::size_t i = 0; i < input.size(); ++i) {
      double magnitude = rng.UniformReal(0.01, 1.0);
      input[i] = rng.UniformBelow(2) == 0 ? magnitude : -magnitude;
    }
    FillUniform(&weights, &rng);
    Tensor out = npc::LeakyReluForward(input);
    Tensor grad_input = npc::LeakyReluBackward(out, weights);
    auto loss = [&] {
      return WeightedSum(npc::LeakyReluForward(input), weights);
    };
    for (std::size_t i = 0; i < input.size(); ++i) {
      double fd = CentralDiff(loss, input.data() + i, 1e-6);
      line->Require(RelError(grad_input[i], fd) <= 1e-8,
                    Fmt("leaky_relu grad rel %g at seed %llu",
                        RelError(grad_input[i], fd),
                        static_cast<unsigned long long>(seed)));
    }
  }
  for (std::uint64_t seed = 900; seed < 920 && line->ok; ++seed) {
    npc::Rng rng(seed);
    Tensor input({3, 6}), weights({4, 6}), bias({4}), loss_weights({3, 4});
    FillUniform(&input, &rng);
    FillUniform(&weights, &rng);
    FillUniform(&bias, &rng);
    FillUniform(&loss_weights, &rng);
    Tensor grad_input, grad_weights, grad_bias;
    npc::DenseBackward(input, weights, loss_weights, &grad_input,
                       &grad_weights, &grad_bias);
    auto loss = [&] {
      return WeightedSum(npc::DenseForward(input, weights, bias),
                         loss_weights);
    };
    Tensor* tensors[3] = {&input, &weights, &bias};
    Tensor* grads[3] = {&grad_input, &grad_weights, &grad_bias};
    for (int t = 0; t < 3; ++t) {
      for (std::size_t i = 0; i < tensors[t]->size(); ++i) {
        double fd = CentralDiff(loss, tensors[t]->data() + i);
        line->Require(RelError((*grads[t])[i], fd) <= 1e-7,
                      Fmt("dense grad %d rel %g at seed %llu", t,
                          RelError((*grads[t])[i], fd),
                          static_cast<unsigned long long>(seed)));
      }
    }
  }
  if (!line->ok) return;

  // End to end: every learnable coordinate of a small model against
  // central differences, for both losses, on five random pairs.
  double max_rel = 0.0;
  for (int which = 0; which < 2 && line->ok; ++which) {
    LossKind kind = which == 0 ? LossKind::kCrossEntropy : LossKind::kCosine;
    ArchitectureSpec spec = TinyArch();
    ModelParams params = npc::BuildModel(spec, 31 + which);
    npc::Rng rng(72 + which);
    if (kind == LossKind::kCrossEntropy) {
      FillUniform(&params.head_w, &rng, -0.3, 0.3);
      params.head_b[0] = 0.05;
      params.head_b[1] = -0.05;
    }
    const std::size_t pairs = 5;
    Tensor windows = PairBatch(spec, pairs, &rng);
    std::vector<int> labels = AlternatingLabels(pairs);

    npc::ModelGrads grads = npc::MakeZeroGrads(params);
    npc::TrunkCache cache;
    npc::TrunkOutputs out = npc::TrunkForward(windows, &params, true, &cache);
    npc::BatchLossResult result =
        kind == LossKind::kCrossEntropy
            ? npc::CrossEntropyBatch(out.graph, labels, params, &grads)
            : npc::CosineBatch(out.graph, labels, false, &grads);
    npc::TrunkBackward(result.grad_graph, cache, params, &grads);

    auto loss = [&] {
      npc::TrunkOutputs o = npc::TrunkForward(windows, &params, true, nullptr);
      return kind == LossKind::kCrossEntropy
                 ? npc::CrossEntropyBatch(o.graph, labels, params, nullptr)
                       .mean_loss
                 : npc::CosineBatch(o.graph, labels, false, nullptr).mean_loss;
    };
    std::vector<npc::NamedTensor> learnable = npc::LearnableTensors(&params);
    std::vector<Tensor*> grad_tensors = npc::GradTensors(&grads);
    for (std::size_t t = 0; t < learnable.size() && line->ok; ++t) {
      Tensor* p = learnable[t].tensor;
      Tensor* g = grad_tensors[t];
      for (std::size_t i = 0; i < p->size(); ++i) {
        double rel = FdRelError(loss, p->data() + i, (*g)[i]);
        max_rel = std::max(max_rel, rel);
        line->Require(rel < 1e-4, Fmt("%s loss, %s[%zu] rel %g",
                                      which == 0 ? "cross-entropy" : "cosine",
                                      learnable[t].name.c_str(), i, rel));
        if (!line->ok) break;
      }
    }
  }
  line->Note(Fmt("5 primitives x 20 seeds; end-to-end max rel %.2g", max_rel));
}

void Criterion4LossIdentities(Line* line) {
  ArchitectureSpec spec = TinyArch();
  ModelParams zero_head = npc::BuildModel(spec, 40);
  npc::Rng rng(41);
  const double kLn2 = 0.6931471805599453;

  // With the zero-initialized head every pair sits exactly at chance.
  for (int trial = 0; trial < 100 && line->ok; ++trial) {
    Tensor windows = PairBatch(spec, 1, &rng);
    npc::TrunkOutputs out =
        npc::TrunkForward(windows, &zero_head, false, nullptr);
    std::vector<double> e1(out.graph.data(),
                           out.graph.data() + spec.embedding_dim);
    std::vector<double> e2(out.graph.data() + spec.embedding_dim,
                           out.graph.data() + 2 * spec.embedding_dim);
    npc::PairLogits logits =
        npc::ClassifyPair(npc::L1Distance(e1, e2), zero_head);
    line->Require(std::abs(logits.p1 + logits.p2 - 1.0) <= 1e-12,
                  Fmt("p1+p2 off by %g", logits.p1 + logits.p2 - 1.0));
    line->Require(std::abs(logits.p1 - 0.5) <= 1e-12,
                  "zero head is not at p1 = 0.5");
    double xent = npc::CrossEntropyFromLogits(logits.g1, logits.g2, trial % 2);
    line->Require(std::abs(xent - kLn2) <= 1e-12,
                  Fmt("loss at p1 = 0.5 is %.17g, not ln 2", xent));
  }
  line->Require(std::abs(npc::CrossEntropyLoss(0.5, 0.5, 0) - kLn2) <= 1e-12,
                "probability-form loss at 0.5 is not ln 2");

  // A random head still yields a normalized two-way softmax.
  ModelParams random_head = npc::BuildModel(spec, 42);
  FillUniform(&random_head.head_w, &rng, -0.4, 0.4);
  FillUniform(&random_head.head_b, &rng, -0.2, 0.2);
  for (int trial = 0; trial < 100 && line->ok; ++trial) {
    Tensor windows = PairBatch(spec, 1, &rng);
    npc::TrunkOutputs out =
        npc::TrunkForward(windows, &random_head, false, nullptr);
    std::vector<double> e1(out.graph.data(),
                           out.graph.data() + spec.embedding_dim);
    std::vector<double> e2(out.graph.data() + spec.embedding_dim,
                           out.graph.data() + 2 * spec.embedding_dim);
    npc::PairLogits logits =
        npc::ClassifyPair(npc::L1Distance(e1, e2), random_head);
    line->Require(std::abs(logits.p1 + logits.p2 - 1.0) <= 1e-12,
                  Fmt("random-head p1+p2 off by %g",
                      logits.p1 + logits.p2 - 1.0));
  }

  // Cosine fixed points: identical genuine and orthogonal impostor are
  // both zero loss.
  std::vector<double> e(8, 0.0), f(8, 0.0);
  e[0] = 2.0;
  e[3] = -1.0;
  f[1] = 0.5;
  f[6] = 3.0;
  line->Require(std::abs(npc::CosineLoss(e, e, 0, false)) <= 1e-12,
                "identical genuine pair has nonzero cosine loss");
  line->Require(std::abs(npc::CosineLoss(e, f, 1, false)) <= 1e-12,
                "orthogonal impostor pair has nonzero cosine loss");

  // Swapping the two windows of every pair changes neither batch loss.
  const std::size_t pairs = 100;
  Tensor windows = PairBatch(spec, pairs, &rng);
  Tensor swapped = SwapHalves(windows);
  std::vector<int> labels = AlternatingLabels(pairs);
  ModelParams forward_a = random_head;
  ModelParams forward_b = random_head;
  npc::TrunkOutputs out_a = npc::TrunkForward(windows, &forward_a, true,
                                              nullptr);
  npc::TrunkOutputs out_b = npc::TrunkForward(swapped, &forward_b, true,
                                              nullptr);
  npc::BatchLossResult xent_a =
      npc::CrossEntropyBatch(out_a.graph, labels, random_head, nullptr);
  npc::BatchLossResult xent_b =
      npc::CrossEntropyBatch(out_b.graph, labels, random_head, nullptr);
  line->Require(std::abs(xent_a.mean_loss - xent_b.mean_loss) <= 1e-12,
                Fmt("cross-entropy asymmetric under swap by %g",
                    xent_a.mean_loss - xent_b.mean_loss));
  npc::BatchLossResult cos_a =
      npc::CosineBatch(out_a.graph, labels, false, nullptr);
  npc::BatchLossResult cos_b =
      npc::CosineBatch(out_b.graph, labels, false, nullptr);
  line->Require(std::abs(cos_a.mean_loss - cos_b.mean_loss) <= 1e-12,
                Fmt("cosine asymmetric under swap by %g",
                    cos_a.mean_loss - cos_b.mean_loss));
  line->Note("softmax, ln 2, cosine fixed points, 100-pair swap symmetry");
}

void Criterion5Sampler(Line* line) {
  npc::Rng rng(909);
  for (int manifest = 0; manifest < 100 && line->ok; ++manifest) {
    std::size_t d = rng.UniformBelow(2) == 0 ? 50 : 100;
    const std::size_t deltas[3] = {37, 100, 200};
    std::size_t delta = deltas[rng.UniformBelow(3)];
    std::size_t num_streams = 2 + rng.UniformBelow(5);
    std::vector<npc::StreamFrames> streams;
    for (std::size_t s = 0; s < num_streams; ++s) {
      streams.push_back({"m" + std::to_string(manifest) + "_s" +
                             std::to_string(s),
                         d + rng.UniformBelow(1200)});
    }
    std::vector<npc::PairSpec> genuine;
    std::size_t expected = 0;
    std::map<std::string, std::size_t> extent;
    for (const npc::StreamFrames& stream : streams) {
      extent[stream.source_id] = stream.num_frames;
      // Streams below 2d admit no genuine pair and are the caller's job
      // to skip; they stay eligible as impostor sources when >= d.
      if (stream.num_frames < 2 * d) continue;
      expected += (stream.num_frames - 2 * d) / delta + 1;
      std::vector<npc::PairSpec> mine = npc::GenerateGenuinePairs(
          stream.source_id, stream.num_frames, d, delta);
      genuine.insert(genuine.end(), mine.begin(), mine.end());
    }
    line->Require(genuine.size() == expected,
                  Fmt("manifest %d: %zu genuine pairs, closed form %zu",
                      manifest, genuine.size(), expected));
    for (const npc::PairSpec& pair : genuine) {
      bool ok = pair.left_id == pair.right_id &&
                pair.right_start == pair.left_start + d &&
                pair.left_start % delta == 0 &&
                pair.left_start + 2 * d <= extent[pair.left_id] &&
                pair.label == 0 && pair.window_len == d;
      line->Require(ok, Fmt("manifest %d: malformed genuine pair", manifest));
      if (!ok) break;
    }
    if (genuine.empty()) continue;
    std::vector<npc::PairSpec> impostor =
        npc::GenerateImpostorPairs(streams, genuine, 7 + manifest);
    line->Require(impostor.size() == genuine.size(),
                  Fmt("manifest %d: %zu impostors for %zu genuine", manifest,
                      impostor.size(), genuine.size()));
    for (std::size_t i = 0; i < impostor.size() && line->ok; ++i) {
      const npc::PairSpec& pair = impostor[i];
      bool ok = pair.left_id == genuine[i].left_id &&
                pair.left_start == genuine[i].left_start &&
                pair.right_id != pair.left_id &&
                pair.right_start + d <= extent[pair.right_id] &&
                pair.label == 1 && pair.window_len == d;
      line->Require(ok, Fmt("manifest %d: malformed impostor %zu", manifest,
                            i));
    }
  }
  if (!line->ok) return;

  // Projection: 100 hours at a 10 ms hop is 36,000,000 frames; with
  // d = 100, delta = 200 and one impostor per genuine pair the corpus
  // yields about 360K samples (reference count 358K for this operating
  // point, 5% tolerance).
  std::vector<npc::StreamFrames> corpus;
  std::vector<npc::PairSpec> genuine;
  for (int s = 0; s < 10; ++s) {
    corpus.push_back({"long" + std::to_string(s), 3600000});
    std::vector<npc::PairSpec> mine =
        npc::GenerateGenuinePairs(corpus.back().source_id, 3600000, 100, 200);
    genuine.insert(genuine.end(), mine.begin(), mine.end());
  }
  std::vector<npc::PairSpec> impostor =
      npc::GenerateImpostorPairs(corpus, genuine, 1);
  double total = static_cast<double>(genuine.size() + impostor.size());
  line->Require(std::abs(total - 358000.0) <= 0.05 * 358000.0,
                Fmt("100 h projection yields %.0f pairs, want 358K +- 5%%",
                    total));
  line->Note(Fmt("invariants on 100 manifests; 100 h projection %.0f pairs",
                 total));
}

void Criterion6LabelNoise(Line* line) {
  const std::size_t d = 100, delta = 200;
  npc::Rng rng(1234);
  const char* speakers[6] = {"a", "b", "c", "d", "e", "f"};
  double worst_gap = 0.0;
  for (double mean_turn : {150.0, 400.0, 800.0}) {
    // Random-process corpus: exponential turn lengths, adjacent turns
    // always change speaker.
    std::vector<npc::LabeledStream> streams;
    for (int s = 0; s < 12; ++s) {
      npc::LabeledStream stream;
      stream.source_id = "noise" + std::to_string(s);
      std::size_t t = 0, speaker = rng.UniformBelow(6);
      while (t < 30000) {
        double u = rng.Uniform01();
        std::size_t len =
            1 + static_cast<std::size_t>(-mean_turn * std::log(1.0 - u));
        len = std::min(len, 30000 - t);
        stream.segments.push_back({speakers[speaker], t, t + len});
        t += len;
        speaker = (speaker + 1 + rng.UniformBelow(5)) % 6;
      }
      streams.push_back(std::move(stream));
    }
    npc::NoiseReport report = npc::MeasureLabelNoise(streams, d, delta);

    // Monte-Carlo oracle: sample genuine spans uniformly and count
    // speaker-boundary crossings with independent interval logic.
    std::vector<std::size_t> counts;
    std::size_t total = 0;
    for (const npc::LabeledStream& stream : streams) {
      std::size_t frames = stream.num_frames();
      std::size_t n = frames >= 2 * d ? (frames - 2 * d) / delta + 1 : 0;
      counts.push_back(n);
      total += n;
    }
    std::size_t crossed = 0;
    const std::size_t draws = 200000;
    for (std::size_t k = 0; k < draws; ++k) {
      std::size_t pick = rng.UniformBelow(total);
      std::size_t which = 0;
      while (pick >= counts[which]) {
        pick -= counts[which];
        ++which;
      }
      std::size_t start = pick * delta;
      std::size_t end = start + 2 * d;
      const std::vector<npc::Segment>& segments = streams[which].segments;
      for (std::size_t j = 1; j < segments.size(); ++j) {
        std::size_t boundary = segments[j].start_frame;
        if (boundary <= start) continue;
        if (boundary >= end) break;
        if (segments[j].speaker_id != segments[j - 1].speaker_id) {
          ++crossed;
          break;
        }
      }
    }
    double mc = static_cast<double>(crossed) / static_cast<double>(draws);
    double gap = std::abs(mc - report.corrupted_fraction);
    worst_gap = std::max(worst_gap, gap);
    line->Require(gap <= 0.01,
                  Fmt("mean turn %.0f: measured %.4f vs oracle %.4f",
                      mean_turn, report.corrupted_fraction, mc));
    if (!line->ok) return;
  }

  // Dialog mixing: every junction of every mixed stream is a speaker
  // change, and the features stay aligned with the segments.
  npc::FeatureStore store;
  std::vector<npc::LabeledStream> sources;
  for (int s = 0; s < 6; ++s) {
    npc::LabeledStream stream;
    stream.source_id = "dlg" + std::to_string(s);
    std::size_t t = 0;
    for (int u = 0; u < 8; ++u) {
      std::size_t len = 20 + rng.UniformBelow(31);
      stream.segments.push_back({"spk" + std::to_string(s), t, t + len});
      t += len;
    }
    store[stream.source_id] =
        npc_test::RandomFeatures(stream.source_id, t, 6, &rng);
    sources.push_back(std::move(stream));
  }
  npc::MixedCorpus mixed = npc::MixDialogs(store, sources, 77);
  line->Require(mixed.streams.size() == sources.size(),
                Fmt("%zu mixed streams from %zu sources",
                    mixed.streams.size(), sources.size()));
  std::size_t junctions = 0;
  for (const npc::LabeledStream& stream : mixed.streams) {
    npc::ValidateSegments(stream.source_id, stream.segments);
    line->Require(stream.segments.size() >= 2,
                  stream.source_id + " has fewer than two utterances");
    for (std::size_t j = 1; j < stream.segments.size(); ++j) {
      ++junctions;
      line->Require(stream.segments[j].speaker_id !=
                        stream.segments[j - 1].speaker_id,
                    stream.source_id + Fmt(": junction %zu keeps speaker %s",
                                           j,
                                           stream.segments[j].speaker_id
                                               .c_str()));
    }
    auto it = mixed.features.find(stream.source_id);
    line->Require(it != mixed.features.end(),
                  stream.source_id + " missing from mixed features");
    if (it != mixed.features.end()) {
      line->Require(it->second.num_frames == stream.num_frames(),
                    stream.source_id + " features disagree with segments");
    }
  }
  line->Note(Fmt("oracle gap <= %.4f on 3 corpora; %zu mixed junctions all "
                 "speaker changes",
                 worst_gap, junctions));
}

// Artifacts shared between the learning criterion and the mirroring
// criterion.
struct LearnedArtifacts {
  std::optional<npc::TrainResult> xent;
};

LearnedArtifacts g_learned;

void Criterion7Learning(Line* line) {
  Clock::time_point start = Clock::now();

  // Two synthetic speakers with distinct stationary spectral profiles,
  // one 300 s stream each (10 minutes of audio total).  One stream per
  // speaker keeps every cross-stream impostor window a cross-speaker
  // window, matching the many-speaker regime at two-speaker scale.
  npc::FeatureStore store;
  npc::Rng rng(2026);
  for (int s = 0; s < 2; ++s) {
    npc::AudioStream audio;
    audio.source_id = "spk" + std::to_string(s);
    audio.samples = npc_test::SynthSpeakerSamples(s, 300 * 16000, &rng);
    npc::FeatureMatrix features = npc::ComputeMfcc(audio);
    features.source_id = audio.source_id;
    store[audio.source_id] = std::move(features);
  }

  std::vector<npc::PairSpec> genuine;
  std::vector<npc::StreamFrames> extents;
  for (const auto& [id, matrix] : store) {
    std::vector<npc::PairSpec> mine =
        npc::GenerateGenuinePairs(matrix, 100, 200);
    genuine.insert(genuine.end(), mine.begin(), mine.end());
    extents.push_back({id, matrix.num_frames});
  }
  std::vector<npc::PairSpec> impostor =
      npc::GenerateImpostorPairs(extents, genuine, 41);
  std::vector<npc::PairSpec> train, val;
  for (std::size_t i = 0; i < genuine.size(); ++i) {
    if (i % 5 == 4) {
      val.push_back(genuine[i]);
      val.push_back(impostor[i]);
    } else {
      train.push_back(genuine[i]);
      train.push_back(impostor[i]);
    }
  }
  line->Require(train.size() + val.size() >= 500,
                Fmt("only %zu pairs from 10 min of audio",
                    train.size() + val.size()));

  // Cross-entropy: must reach 95% validation accuracy within the epoch
  // budget and inside a 10 minute wall; the early stop ends the run at
  // the first epoch that clears the bar.
  ArchitectureSpec arch;
  npc::TrainConfig config;
  config.loss = LossKind::kCrossEntropy;
  config.batch_size = 64;
  config.epochs = 6;  // 30 allowed; at ~90 s/epoch the wall bound binds first
  config.seed = 7;
  config.lr = 1e-3;
  config.stop_at_val_accuracy = 0.95;
  Clock::time_point t0 = Clock::now();
  npc::TrainResult xent = npc::Train(train, val, store, arch, config);
  double xent_wall = Seconds(t0, Clock::now());
  double xent_val = xent.report.epochs[xent.report.best_epoch].val_accuracy;
  std::size_t xent_epochs = xent.report.epochs.size();
  line->Require(xent_val >= 0.95,
                Fmt("cross-entropy best val %.3f < 0.95 after %zu epochs",
                    xent_val, xent_epochs));
  line->Require(xent_epochs <= 30,
                Fmt("cross-entropy took %zu epochs", xent_epochs));
  line->Require(xent_wall < 600.0,
                Fmt("cross-entropy training took %.0f s", xent_wall));

  config.loss = LossKind::kCosine;
  config.stop_at_val_accuracy = 0.85;
  t0 = Clock::now();
  npc::TrainResult cosine = npc::Train(train, val, store, arch, config);
  double cos_val =
      cosine.report.epochs[cosine.report.best_epoch].val_accuracy;
  line->Require(cos_val >= 0.85,
                Fmt("cosine best val %.3f < 0.85 after %zu epochs", cos_val,
                    cosine.report.epochs.size()));

  // Frame-level 1-NN speaker identification: learned embeddings must not
  // lose to the sliding mean-and-std baseline on the same splits.  Each
  // stream is sliced into ten utterances.
  std::vector<npc::UtteranceFeatures> embedded, baseline;
  for (const auto& [id, matrix] : store) {
    npc::FeatureMatrix emb = npc::ExtractEmbeddings(matrix, &xent.params, 50,
                                                    64);
    npc::FeatureMatrix stats = npc::MfccStatsStream(matrix, 100);
    std::size_t emb_rows = emb.num_frames / 10;
    std::size_t stats_rows = stats.num_frames / 10;
    for (int u = 0; u < 10; ++u) {
      npc::UtteranceFeatures utt;
      utt.utterance_id = id + "_u" + std::to_string(u);
      utt.speaker_id = id;
      utt.frames.source_id = utt.utterance_id;
      utt.frames.num_coeffs = emb.num_coeffs;
      utt.frames.num_frames = emb_rows;
      utt.frames.values.assign(
          emb.values.begin() + u * emb_rows * emb.num_coeffs,
          emb.values.begin() + (u + 1) * emb_rows * emb.num_coeffs);
      embedded.push_back(utt);
      utt.frames.num_coeffs = stats.num_coeffs;
      utt.frames.num_frames = stats_rows;
      utt.frames.values.assign(
          stats.values.begin() + u * stats_rows * stats.num_coeffs,
          stats.values.begin() + (u + 1) * stats_rows * stats.num_coeffs);
      baseline.push_back(utt);
    }
  }
  std::vector<npc::AccuracyCell> emb_cells =
      npc::FrameIdExperiment(embedded, {3}, 3, 2, 123, 300);
  std::vector<npc::AccuracyCell> base_cells =
      npc::FrameIdExperiment(baseline, {3}, 3, 2, 123, 300);
  line->Require(emb_cells[0].mean_accuracy >= base_cells[0].mean_accuracy,
                Fmt("embedding frame id %.4f below baseline %.4f",
                    emb_cells[0].mean_accuracy, base_cells[0].mean_accuracy));

  g_learned.xent = std::move(xent);
  line->Note(Fmt("%zu pairs; xent val %.3f in %zu epoch(s) (%.0f s), cosine "
                 "val %.3f, frame id emb %.3f vs mfcc-stats %.3f, total "
                 "%.0f s",
                 train.size() + val.size(), xent_val, xent_epochs, xent_wall,
                 cos_val, emb_cells[0].mean_accuracy,
                 base_cells[0].mean_accuracy, Seconds(start, Clock::now())));
}

void Criterion8Mirroring(Line* line) {
  if (!g_learned.xent.has_value()) {
    line->Fail("no trained model (learning criterion did not complete)");
    return;
  }
  npc::MirrorStats stats = npc::WeightMirrorStats(g_learned.xent->params);
  line->Require(stats.cosine < -0.9,
                Fmt("cosine(w1, w2) = %.4f, want < -0.9", stats.cosine));
  double bias_sum = std::abs(stats.b1 + stats.b2);
  line->Require(bias_sum < 0.5 * std::abs(stats.b1),
                Fmt("|b1+b2| = %.4g not below 0.5|b1| = %.4g", bias_sum,
                    0.5 * std::abs(stats.b1)));
  // The abs-sum statistics are reported against their corpus-scale
  // reference values (mean 0.0284, std 0.0206) but not gated: at desk
  // scale the mirror is near exact and both land close to zero.
  line->Note(Fmt("cos(w1,w2) %.6f, |b1+b2| %.2g (b1 %.4g); mean|w1+w2| %.3g, "
                 "std %.3g vs references 0.0284, 0.0206",
                 stats.cosine, bias_sum, stats.b1, stats.mean_abs_sum,
                 stats.std_abs_sum));
}

void Criterion9Metrics(Line* line) {
  npc::Rng rng(555);
  double worst_eer = 0.0, worst_dcf = 0.0;
  std::vector<double> scores;
  std::vector<bool> targets;
  for (int set = 0; set < 200 && line->ok; ++set) {
    RandomScoreSet(&rng, &scores, &targets);
    npc::EerResult eer = npc::ComputeEer(scores, targets);
    double oracle = NaiveEer(scores, targets);
    worst_eer = std::max(worst_eer, std::abs(eer.eer - oracle));
    line->Require(std::abs(eer.eer - oracle) <= 1e-9,
                  Fmt("set %d: eer %.12f vs brute force %.12f", set, eer.eer,
                      oracle));
    line->Require(eer.eer >= 0.0 && eer.eer <= 1.0,
                  Fmt("set %d: eer %.12f outside [0, 1]", set, eer.eer));
    for (double p : {0.01, 0.1, 0.3}) {
      for (double c_miss : {1.0, 10.0}) {
        double dcf = npc::ComputeMinDcf(scores, targets, p, c_miss, 1.0);
        double dcf_oracle = NaiveDcf(scores, targets, p, c_miss, 1.0);
        worst_dcf = std::max(worst_dcf, std::abs(dcf - dcf_oracle));
        line->Require(std::abs(dcf - dcf_oracle) <= 1e-9,
                      Fmt("set %d: minDCF(%g, %g) %.12f vs brute force %.12f",
                          set, p, c_miss, dcf, dcf_oracle));
        line->Require(dcf <= 1.0 + 1e-12,
                      Fmt("set %d: minDCF %.12f above 1", set, dcf));
        if (!line->ok) break;
      }
      if (!line->ok) break;
    }
  }
  if (!line->ok) return;

  // EER depends on scores only through their order.
  for (int set = 0; set < 50 && line->ok; ++set) {
    RandomScoreSet(&rng, &scores, &targets);
    double before = npc::ComputeEer(scores, targets).eer;
    std::vector<double> warped(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      warped[i] = scores[i] * scores[i] * scores[i] + 2.0 * scores[i];
    }
    double after = npc::ComputeEer(warped, targets).eer;
    line->Require(std::abs(before - after) <= 1e-12,
                  Fmt("set %d: eer moved %g under a monotone transform", set,
                      std::abs(before - after)));
  }
  line->Note(Fmt("200 sets: eer gap <= %.1g, minDCF gap <= %.1g; monotone "
                 "invariance on 50 sets",
                 worst_eer, worst_dcf));
}

void Criterion10Reproducibility(Line* line) {
  TempDir dir("acceptance_cli");
  std::string log = dir.Sub("cli.log");

  // Two short synthetic speakers and a manifest.
  npc::Rng rng(31);
  std::ofstream manifest(dir.Sub("manifest.tsv"), std::ios::trunc);
  for (int s = 0; s < 2; ++s) {
    std::string id = "wav" + std::string(1, static_cast<char>('a' + s));
    std::string path = dir.Sub(id + ".wav");
    npc::WriteWavPcm16(path,
                       npc_test::SynthSpeakerSamples(2 + s, 12 * 16000, &rng));
    manifest << id << '\t' << path << '\n';
  }
  manifest.close();

  // Each stage runs twice with identical arguments; the first run's
  // artifacts are set aside and must match the rerun byte for byte.
  struct Stage {
    std::string name;
    std::string args;
    std::string out;   // directory or file produced
    bool is_dir = true;
    std::vector<std::string> extra;  // sibling files for file outputs
  };
  std::string feat = dir.Sub("feat");
  std::string pairs = dir.Sub("pairs.tsv");
  std::string run = dir.Sub("run");
  std::string emb = dir.Sub("emb");
  std::vector<Stage> stages = {
      {"features",
       "features --manifest " + dir.Sub("manifest.tsv") + " --out " + feat +
           " --workers 1",
       feat},
      {"pairs",
       "pairs --manifest " + dir.Sub("manifest.tsv") + " --features " + feat +
           " --out " + pairs + " --d 100 --delta 200 --seed 3",
       pairs, false, {pairs + ".config"}},
      {"train",
       "train --pairs " + pairs + " --features " + feat + " --out " + run +
           " --batch 8 --epochs 2 --seed 11 --lr 0.001 --workers 1",
       run},
      {"extract",
       "extract --checkpoint " + run + "/model.npck --manifest " +
           dir.Sub("manifest.tsv") + " --features " + feat + " --out " + emb +
           " --stride 50 --workers 1",
       emb},
  };
  for (const Stage& stage : stages) {
    int rc = RunCli(stage.args, log);
    line->Require(rc == 0, stage.name + Fmt(" exited with %d on first run",
                                            rc));
    if (!line->ok) return;
    fs::path first = fs::path(stage.out + ".first");
    fs::rename(stage.out, first);
    std::vector<fs::path> extra_first;
    for (const std::string& sibling : stage.extra) {
      extra_first.push_back(sibling + ".first");
      fs::rename(sibling, extra_first.back());
    }
    rc = RunCli(stage.args, log);
    line->Require(rc == 0, stage.name + Fmt(" exited with %d on rerun", rc));
    if (!line->ok) return;
    if (stage.is_dir) {
      SameDirBytes(first, stage.out, line);
    } else {
      SameFileBytes(first, stage.out, line);
      for (std::size_t i = 0; i < stage.extra.size(); ++i) {
        SameFileBytes(extra_first[i], stage.extra[i], line);
      }
    }
    if (!line->ok) {
      line->Fail(stage.name + ": " + line->detail);
      return;
    }
  }
  line->Note("features, pairs, train, extract byte-identical on rerun "
             "(checkpoints included)");
}

}  // namespace

int main() {
  npc::SetNumWorkers(0);
  int passed = 0;
  const struct {
    const char* name;
    void (*body)(Line*);
  } criteria[] = {
      {"architecture chain", Criterion1Architecture},
      {"parameter budget", Criterion2Parameters},
      {"gradient correctness", Criterion3Gradients},
      {"loss identities", Criterion4LossIdentities},
      {"pair sampler", Criterion5Sampler},
      {"label-noise oracle", Criterion6LabelNoise},
      {"desk-scale learning", Criterion7Learning},
      {"weight mirroring", Criterion8Mirroring},
      {"metric oracles", Criterion9Metrics},
      {"command-line reproducibility", Criterion10Reproducibility},
  };
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    if (RunCriterion(index, criterion.name, criterion.body)) ++passed;
  }
  std::printf("acceptance: %d/10 criteria passed\n", passed);
  return passed == 10 ? 0 : 1;
}
