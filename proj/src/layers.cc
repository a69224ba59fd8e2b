// src/layers.cc

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

#include "npc/layers.h"

#include <cmath>
#include <string>

#include "npc/error.h"
#include "npc/parallel.h"

namespace npc {

namespace {

void RequireRank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + ": expected rank " +
                    std::to_string(rank) + ", got " +
                    std::to_string(t.rank()));
  }
}

}  // namespace

void CheckFinite(const Tensor& tensor, const char* op_name) {
  const double* p = tensor.data();
  std::size_t n = tensor.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  std::string(op_name) + " produced a non-finite value");
    }
  }
}

Tensor Conv2dForward(const Tensor& input, const Tensor& kernels,
                     const Tensor& bias) {
  RequireRank(input, 4, "conv2d input");
  RequireRank(kernels, 4, "conv2d kernels");
  RequireRank(bias, 1, "conv2d bias");
  std::size_t batch = input.dim(0), ci = input.dim(1);
  std::size_t h = input.dim(2), w = input.dim(3);
  std::size_t co = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  if (kernels.dim(1) != ci || bias.dim(0) != co || h < kh || w < kw) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d shapes do not agree");
  }
  std::size_t ho = h - kh + 1, wo = w - kw + 1;
  Tensor out({batch, co, ho, wo});

  const double* in = input.data();
  const double* ker = kernels.data();
  const double* b = bias.data();
  double* o = out.data();

  // One worker owns one (batch, out-channel) output plane.
  ParallelFor(0, batch * co, [&](std::size_t plane) {
    std::size_t n = plane / co, c = plane % co;
    double* out_plane = o + (n * co + c) * ho * wo;
    for (std::size_t i = 0; i < ho * wo; ++i) out_plane[i] = b[c];
    for (std::size_t ic = 0; ic < ci; ++ic) {
      const double* in_plane = in + (n * ci + ic) * h * w;
      const double* k_plane = ker + (c * ci + ic) * kh * kw;
      for (std::size_t a = 0; a < kh; ++a) {
        for (std::size_t bk = 0; bk < kw; ++bk) {
          double weight = k_plane[a * kw + bk];
          for (std::size_t y = 0; y < ho; ++y) {
            const double* in_row = in_plane + (y + a) * w + bk;
            double* out_row = out_plane + y * wo;
            for (std::size_t x = 0; x < wo; ++x) {
              out_row[x] += weight * in_row[x];
            }
          }
        }
      }
    }
  });
  CheckFinite(out, "conv2d_forward");
  return out;
}

void Conv2dBackward(const Tensor& input, const Tensor& kernels,
                    const Tensor& grad_out, Tensor* grad_input,
                    Tensor* grad_kernels, Tensor* grad_bias) {
  RequireRank(input, 4, "conv2d input");
  RequireRank(kernels, 4, "conv2d kernels");
  RequireRank(grad_out, 4, "conv2d grad_out");
  std::size_t batch = input.dim(0), ci = input.dim(1);
  std::size_t h = input.dim(2), w = input.dim(3);
  std::size_t co = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  std::size_t ho = h - kh + 1, wo = w - kw + 1;
  if (grad_out.dim(0) != batch || grad_out.dim(1) != co ||
      grad_out.dim(2) != ho || grad_out.dim(3) != wo ||
      kernels.dim(1) != ci) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d backward shapes");
  }
  const double* in = input.data();
  const double* ker = kernels.data();
  const double* go = grad_out.data();

  if (grad_input != nullptr) {
    *grad_input = Tensor({batch, ci, h, w});
    double* gi = grad_input->data();
    // One worker owns one (batch, in-channel) input plane.
    ParallelFor(0, batch * ci, [&](std::size_t plane) {
      std::size_t n = plane / ci, ic = plane % ci;
      double* gi_plane = gi + (n * ci + ic) * h * w;
      for (std::size_t c = 0; c < co; ++c) {
        const double* go_plane = go + (n * co + c) * ho * wo;
        const double* k_plane = ker + (c * ci + ic) * kh * kw;
        for (std::size_t a = 0; a < kh; ++a) {
          for (std::size_t bk = 0; bk < kw; ++bk) {
            double weight = k_plane[a * kw + bk];
            for (std::size_t y = 0; y < ho; ++y) {
              const double* go_row = go_plane + y * wo;
              double* gi_row = gi_plane + (y + a) * w + bk;
              for (std::size_t x = 0; x < wo; ++x) {
                gi_row[x] += weight * go_row[x];
              }
            }
          }
        }
      }
    });
    CheckFinite(*grad_input, "conv2d_backward grad_input");
  }

  if (grad_kernels != nullptr) {
    *grad_kernels = Tensor({co, ci, kh, kw});
    double* gk = grad_kernels->data();
    // One worker owns one (out-channel, in-channel) kernel plane.
    ParallelFor(0, co * ci, [&](std::size_t plane) {
      std::size_t c = plane / ci, ic = plane % ci;
      double* gk_plane = gk + (c * ci + ic) * kh * kw;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* go_plane = go + (n * co + c) * ho * wo;
        const double* in_plane = in + (n * ci + ic) * h * w;
        for (std::size_t a = 0; a < kh; ++a) {
          for (std::size_t bk = 0; bk < kw; ++bk) {
            double acc = 0.0;
            for (std::size_t y = 0; y < ho; ++y) {
              const double* go_row = go_plane + y * wo;
              const double* in_row = in_plane + (y + a) * w + bk;
              for (std::size_t x = 0; x < wo; ++x) {
                acc += go_row[x] * in_row[x];
              }
            }
            gk_plane[a * kw + bk] += acc;
          }
        }
      }
    });
    CheckFinite(*grad_kernels, "conv2d_backward grad_kernels");
  }

  if (grad_bias != nullptr) {
    *grad_bias = Tensor({co});
    double* gb = grad_bias->data();
    ParallelFor(0, co, [&](std::size_t c) {
      double acc = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const double* go_plane = go + (n * co + c) * ho * wo;
        for (std::size_t i = 0; i < ho * wo; ++i) acc += go_plane[i];
      }
      gb[c] = acc;
    });
    CheckFinite(*grad_bias, "conv2d_backward grad_bias");
  }
}

PoolResult MaxPool2x2Forward(const Tensor& input) {
  RequireRank(input, 4, "maxpool input");
  std::size_t batch = input.dim(0), ch = input.dim(1);
  std::size_t h = input.dim(2), w = input.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw Error(ErrorCode::kOddExtent,
                "maxpool needs even extents, got " + std::to_string(h) + "×" +
                    std::to_string(w));
  }
  std::size_t ho = h / 2, wo = w / 2;
  PoolResult result;
  result.output = Tensor({batch, ch, ho, wo});
  result.argmax.assign(batch * ch * ho * wo, 0);
  const double* in = input.data();
  double* out = result.output.data();
  std::uint32_t* arg = result.argmax.data();

  ParallelFor(0, batch * ch, [&](std::size_t plane) {
    const double* in_plane = in + plane * h * w;
    double* out_plane = out + plane * ho * wo;
    std::uint32_t* arg_plane = arg + plane * ho * wo;
    for (std::size_t y = 0; y < ho; ++y) {
      for (std::size_t x = 0; x < wo; ++x) {
        // Flat candidate offsets in ascending order; strict comparison
        // keeps the first (smallest) index on ties.
        std::size_t base = (2 * y) * w + 2 * x;
        std::size_t candidates[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = candidates[0];
        double best_value = in_plane[best];
        for (int i = 1; i < 4; ++i) {
          if (in_plane[candidates[i]] > best_value) {
            best = candidates[i];
            best_value = in_plane[best];
          }
        }
        out_plane[y * wo + x] = best_value;
        arg_plane[y * wo + x] = static_cast<std::uint32_t>(best);
      }
    }
  });
  CheckFinite(result.output, "maxpool2x2_forward");
  return result;
}

Tensor MaxPool2x2Backward(const std::vector<std::size_t>& input_shape,
                          const std::vector<std::uint32_t>& argmax,
                          const Tensor& grad_out) {
  if (input_shape.size() != 4) {
    throw Error(ErrorCode::kShapeMismatch, "maxpool backward input shape");
  }
  std::size_t batch = input_shape[0], ch = input_shape[1];
  std::size_t h = input_shape[2], w = input_shape[3];
  std::size_t ho = h / 2, wo = w / 2;
  if (grad_out.size() != batch * ch * ho * wo ||
      argmax.size() != grad_out.size()) {
    throw Error(ErrorCode::kShapeMismatch, "maxpool backward shapes");
  }
  Tensor grad_input({batch, ch, h, w});
  double* gi = grad_input.data();
  const double* go = grad_out.data();
  const std::uint32_t* arg = argmax.data();
  ParallelFor(0, batch * ch, [&](std::size_t plane) {
    double* gi_plane = gi + plane * h * w;
    const double* go_plane = go + plane * ho * wo;
    const std::uint32_t* arg_plane = arg + plane * ho * wo;
    for (std::size_t i = 0; i < ho * wo; ++i) {
      gi_plane[arg_plane[i]] += go_plane[i];
    }
  });
  CheckFinite(grad_input, "maxpool2x2_backward");
  return grad_input;
}

namespace {

// Shape handling shared by batch-norm forward/backward: rank-2 B×F has F
// features with plane size 1; rank-4 B×C×H×W has C features with plane
// size H·W.  Element (n, f, s) lives at (n·F + f)·plane + s.
struct BnLayout {
  std::size_t batch = 0, features = 0, plane = 0;
};

BnLayout BnLayoutOf(const Tensor& input) {
  BnLayout layout;
  if (input.rank() == 2) {
    layout = {input.dim(0), input.dim(1), 1};
  } else if (input.rank() == 4) {
    layout = {input.dim(0), input.dim(1), input.dim(2) * input.dim(3)};
  } else {
    throw Error(ErrorCode::kShapeMismatch,
                "batchnorm expects rank 2 or 4 input");
  }
  return layout;
}

}  // namespace

Tensor BatchNormForward(const Tensor& input, const Tensor& gamma,
                        const Tensor& beta, bool train, Tensor* running_mean,
                        Tensor* running_var, double momentum, double eps,
                        BatchNormCache* cache) {
  BnLayout layout = BnLayoutOf(input);
  if (gamma.size() != layout.features || beta.size() != layout.features ||
      running_mean == nullptr || running_var == nullptr ||
      running_mean->size() != layout.features ||
      running_var->size() != layout.features) {
    throw Error(ErrorCode::kShapeMismatch, "batchnorm parameter shapes");
  }
  std::size_t count = layout.batch * layout.plane;
  if (train && count < 2) {
    throw Error(ErrorCode::kDegenerateBatch,
                "batchnorm train mode needs at least 2 values per feature");
  }
  Tensor out(input.shape());
  if (train && cache != nullptr) {
    cache->xhat = Tensor(input.shape());
    cache->inv_std.assign(layout.features, 0.0);
  }
  const double* in = input.data();
  const double* g = gamma.data();
  const double* b = beta.data();
  double* o = out.data();
  double* rm = running_mean->data();
  double* rv = running_var->data();

  ParallelFor(0, layout.features, [&](std::size_t f) {
    double mean, inv_std, var = 0.0;
    if (train) {
      double sum = 0.0;
      for (std::size_t n = 0; n < layout.batch; ++n) {
        const double* p = in + (n * layout.features + f) * layout.plane;
        for (std::size_t s = 0; s < layout.plane; ++s) sum += p[s];
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t n = 0; n < layout.batch; ++n) {
        const double* p = in + (n * layout.features + f) * layout.plane;
        for (std::size_t s = 0; s < layout.plane; ++s) {
          double d = p[s] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<double>(count);  // biased variance
      inv_std = 1.0 / std::sqrt(var + eps);
    } else {
      mean = rm[f];
      inv_std = 1.0 / std::sqrt(rv[f] + eps);
    }

    double scale = g[f] * inv_std;
    double shift = b[f] - scale * mean;
    for (std::size_t n = 0; n < layout.batch; ++n) {
      std::size_t off = (n * layout.features + f) * layout.plane;
      const double* p = in + off;
      double* q = o + off;
      for (std::size_t s = 0; s < layout.plane; ++s) {
        q[s] = scale * p[s] + shift;
      }
    }

    if (train) {
      if (cache != nullptr) {
        double* xh = cache->xhat.data();
        for (std::size_t n = 0; n < layout.batch; ++n) {
          std::size_t off = (n * layout.features + f) * layout.plane;
          const double* p = in + off;
          double* q = xh + off;
          for (std::size_t s = 0; s < layout.plane; ++s) {
            q[s] = (p[s] - mean) * inv_std;
          }
        }
        cache->inv_std[f] = inv_std;
      }
      rm[f] = momentum * rm[f] + (1.0 - momentum) * mean;
      rv[f] = momentum * rv[f] + (1.0 - momentum) * var;
    }
  });
  CheckFinite(out, "batchnorm_forward");
  return out;
}

Tensor BatchNormBackward(const BatchNormCache& cache, const Tensor& gamma,
                         const Tensor& grad_out, Tensor* grad_gamma,
                         Tensor* grad_beta) {
  BnLayout layout = BnLayoutOf(grad_out);
  if (!cache.xhat.SameShape(grad_out) ||
      cache.inv_std.size() != layout.features ||
      gamma.size() != layout.features) {
    throw Error(ErrorCode::kShapeMismatch, "batchnorm backward shapes");
  }
  if (grad_gamma != nullptr && grad_gamma->size() != layout.features) {
    *grad_gamma = Tensor({layout.features});
  }
  if (grad_beta != nullptr && grad_beta->size() != layout.features) {
    *grad_beta = Tensor({layout.features});
  }
  Tensor grad_input(grad_out.shape());
  std::size_t count = layout.batch * layout.plane;
  const double* go = grad_out.data();
  const double* xh = cache.xhat.data();
  const double* g = gamma.data();
  double* gi = grad_input.data();

  ParallelFor(0, layout.features, [&](std::size_t f) {
    double sum_go = 0.0, sum_go_xhat = 0.0;
    for (std::size_t n = 0; n < layout.batch; ++n) {
      std::size_t off = (n * layout.features + f) * layout.plane;
      const double* pg = go + off;
      const double* px = xh + off;
      for (std::size_t s = 0; s < layout.plane; ++s) {
        sum_go += pg[s];
        sum_go_xhat += pg[s] * px[s];
      }
    }
    if (grad_gamma != nullptr) (*grad_gamma)[f] += sum_go_xhat;
    if (grad_beta != nullptr) (*grad_beta)[f] += sum_go;

    // dx = γ·inv_std/N · (N·dy − Σdy − x̂·Σ(dy·x̂))
    double k = g[f] * cache.inv_std[f] / static_cast<double>(count);
    double n_count = static_cast<double>(count);
    for (std::size_t n = 0; n < layout.batch; ++n) {
      std::size_t off = (n * layout.features + f) * layout.plane;
      const double* pg = go + off;
      const double* px = xh + off;
      double* pi = gi + off;
      for (std::size_t s = 0; s < layout.plane; ++s) {
        pi[s] = k * (n_count * pg[s] - sum_go - px[s] * sum_go_xhat);
      }
    }
  });
  CheckFinite(grad_input, "batchnorm_backward");
  return grad_input;
}

Tensor LeakyReluForward(const Tensor& input, double slope) {
  Tensor out(input.shape());
  const double* in = input.data();
  double* o = out.data();
  std::size_t n = input.size();
  for (std::size_t i = 0; i < n; ++i) {
    o[i] = in[i] > 0.0 ? in[i] : slope * in[i];
  }
  CheckFinite(out, "leaky_relu_forward");
  return out;
}

Tensor LeakyReluBackward(const Tensor& output, const Tensor& grad_out,
                         double slope) {
  if (!output.SameShape(grad_out)) {
    throw Error(ErrorCode::kShapeMismatch, "leaky_relu backward shapes");
  }
  Tensor grad_input(output.shape());
  const double* out = output.data();
  const double* go = grad_out.data();
  double* gi = grad_input.data();
  std::size_t n = output.size();
  for (std::size_t i = 0; i < n; ++i) {
    gi[i] = out[i] > 0.0 ? go[i] : slope * go[i];
  }
  CheckFinite(grad_input, "leaky_relu_backward");
  return grad_input;
}

Tensor DenseForward(const Tensor& input, const Tensor& weights,
                    const Tensor& bias) {
  RequireRank(input, 2, "dense input");
  RequireRank(weights, 2, "dense weights");
  RequireRank(bias, 1, "dense bias");
  std::size_t batch = input.dim(0), in_dim = input.dim(1);
  std::size_t out_dim = weights.dim(0);
  if (weights.dim(1) != in_dim || bias.dim(0) != out_dim) {
    throw Error(ErrorCode::kShapeMismatch, "dense shapes do not agree");
  }
  Tensor out({batch, out_dim});
  const double* in = input.data();
  const double* wt = weights.data();
  const double* b = bias.data();
  double* o = out.data();
  ParallelFor(0, batch, [&](std::size_t n) {
    const double* row = in + n * in_dim;
    double* out_row = o + n * out_dim;
    for (std::size_t j = 0; j < out_dim; ++j) {
      const double* w_row = wt + j * in_dim;
      double acc = b[j];
      for (std::size_t i = 0; i < in_dim; ++i) acc += w_row[i] * row[i];
      out_row[j] = acc;
    }
  });
  CheckFinite(out, "dense_forward");
  return out;
}

void DenseBackward(const Tensor& input, const Tensor& weights,
                   const Tensor& grad_out, Tensor* grad_input,
                   Tensor* grad_weights, Tensor* grad_bias) {
  std::size_t batch = input.dim(0), in_dim = input.dim(1);
  std::size_t out_dim = weights.dim(0);
  if (grad_out.dim(0) != batch || grad_out.dim(1) != out_dim ||
      weights.dim(1) != in_dim) {
    throw Error(ErrorCode::kShapeMismatch, "dense backward shapes");
  }
  const double* in = input.data();
  const double* wt = weights.data();
  const double* go = grad_out.data();

  if (grad_input != nullptr) {
    *grad_input = Tensor({batch, in_dim});
    double* gi = grad_input->data();
    ParallelFor(0, batch, [&](std::size_t n) {
      double* gi_row = gi + n * in_dim;
      const double* go_row = go + n * out_dim;
      for (std::size_t j = 0; j < out_dim; ++j) {
        double g = go_row[j];
        const double* w_row = wt + j * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) gi_row[i] += g * w_row[i];
      }
    });
    CheckFinite(*grad_input, "dense_backward grad_input");
  }

  if (grad_weights != nullptr) {
    *grad_weights = Tensor({out_dim, in_dim});
    double* gw = grad_weights->data();
    ParallelFor(0, out_dim, [&](std::size_t j) {
      double* gw_row = gw + j * in_dim;
      for (std::size_t n = 0; n < batch; ++n) {
        double g = go[n * out_dim + j];
        const double* row = in + n * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) gw_row[i] += g * row[i];
      }
    });
    CheckFinite(*grad_weights, "dense_backward grad_weights");
  }

  if (grad_bias != nullptr) {
    *grad_bias = Tensor({out_dim});
    double* gb = grad_bias->data();
    for (std::size_t n = 0; n < batch; ++n) {
      const double* go_row = go + n * out_dim;
      for (std::size_t j = 0; j < out_dim; ++j) gb[j] += go_row[j];
    }
    CheckFinite(*grad_bias, "dense_backward grad_bias");
  }
}

}  // namespace npc
