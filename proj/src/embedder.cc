// src/embedder.cc

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

#include "npc/embedder.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "npc/error.h"

namespace npc {

FeatureMatrix ExtractEmbeddings(const FeatureMatrix& features,
                                ModelParams* params, std::size_t stride,
                                std::size_t batch_windows) {
  const ArchitectureSpec& spec = params->spec;
  std::size_t d = spec.input_frames, m = spec.input_coeffs;
  if (stride == 0 || batch_windows == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "stride and batch size must be positive");
  }
  if (features.num_coeffs != m) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature width " + std::to_string(features.num_coeffs) +
                    " vs model input " + std::to_string(m));
  }
  if (features.num_frames < d) {
    throw Error(ErrorCode::kStreamTooShort,
                features.source_id + ": " +
                    std::to_string(features.num_frames) +
                    " frames, need at least " + std::to_string(d));
  }
  std::size_t positions = (features.num_frames - d) / stride + 1;

  FeatureMatrix out;
  out.source_id = features.source_id;
  out.num_frames = positions;
  out.num_coeffs = spec.embedding_dim;
  out.values.resize(positions * spec.embedding_dim);

  std::size_t window = d * m;
  for (std::size_t begin = 0; begin < positions; begin += batch_windows) {
    std::size_t end = std::min(begin + batch_windows, positions);
    std::size_t batch = end - begin;
    Tensor windows({batch, 1, d, m});
    for (std::size_t i = 0; i < batch; ++i) {
      std::size_t start = (begin + i) * stride;
      std::memcpy(windows.data() + i * window,
                  features.values.data() + start * m, window * sizeof(double));
    }
    TrunkOutputs result = TrunkForward(windows, params, false, nullptr);
    std::memcpy(out.values.data() + begin * spec.embedding_dim,
                result.embedding.data(),
                batch * spec.embedding_dim * sizeof(double));
  }
  return out;
}

FeatureMatrix MfccStatsStream(const FeatureMatrix& features,
                              std::size_t window) {
  if (window < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "stats window must cover at least two frames");
  }
  if (features.num_frames < window) {
    throw Error(ErrorCode::kStreamTooShort,
                features.source_id + ": " +
                    std::to_string(features.num_frames) +
                    " frames, need at least " + std::to_string(window));
  }
  std::size_t positions = features.num_frames - window + 1;
  std::size_t cols = features.num_coeffs;

  FeatureMatrix out;
  out.source_id = features.source_id;
  out.num_frames = positions;
  out.num_coeffs = 2 * cols;
  out.values.resize(positions * 2 * cols);
  for (std::size_t t = 0; t < positions; ++t) {
    std::vector<double> pooled = PoolUtterance(
        features.values.data() + t * cols, window, cols);
    std::copy(pooled.begin(), pooled.end(), out.values.begin() + t * 2 * cols);
  }
  return out;
}

std::vector<double> PoolUtterance(const double* values, std::size_t rows,
                                  std::size_t cols) {
  if (rows < 2) {
    throw Error(ErrorCode::kTooFewFrames,
                "pooling needs at least two rows, got " +
                    std::to_string(rows));
  }
  std::vector<double> out(2 * cols);
  double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) sum += values[r * cols + c];
    double mean = sum * inv_rows;
    double sq = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double dev = values[r * cols + c] - mean;
      sq += dev * dev;
    }
    out[c] = mean;
    out[cols + c] = std::sqrt(sq * inv_rows);
  }
  return out;
}

std::vector<double> PoolUtterance(const FeatureMatrix& frames) {
  return PoolUtterance(frames.values.data(), frames.num_frames,
                       frames.num_coeffs);
}

}  // namespace npc
