// src/mfcc.cc

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

#include "npc/mfcc.h"

#include <cmath>
#include <numbers>
#include <string>

#include "npc/error.h"
#include "npc/parallel.h"

namespace npc {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::size_t NumFrames(std::size_t num_samples, const MfccConfig& config) {
  if (num_samples < config.frame_length) return 0;
  return (num_samples - config.frame_length) / config.frame_shift + 1;
}

std::vector<double> HammingWindow(std::size_t length) {
  std::vector<double> window(length);
  for (std::size_t n = 0; n < length; ++n) {
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi *
                                       static_cast<double>(n) /
                                       static_cast<double>(length - 1));
  }
  return window;
}

void Fft(std::vector<std::complex<double>>* buffer) {
  auto& a = *buffer;
  std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "FFT size must be a power of two, got " + std::to_string(n));
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> MagnitudeSpectrum(const double* frame, std::size_t n,
                                      std::size_t fft_size) {
  std::vector<std::complex<double>> buffer(fft_size, {0.0, 0.0});
  for (std::size_t i = 0; i < n && i < fft_size; ++i) {
    buffer[i] = {frame[i], 0.0};
  }
  Fft(&buffer);
  std::vector<double> magnitude(fft_size / 2 + 1);
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    magnitude[i] = std::abs(buffer[i]);
  }
  return magnitude;
}

MelFilterbank BuildMelFilterbank(const MfccConfig& config) {
  MelFilterbank bank;
  bank.num_filters = config.num_filters;
  bank.num_bins = config.fft_size / 2 + 1;
  bank.weights.assign(bank.num_filters * bank.num_bins, 0.0);
  bank.center_freq_hz.resize(bank.num_filters);

  double mel_low = HzToMel(config.low_freq_hz);
  double mel_high = HzToMel(config.high_freq_hz);
  std::size_t points = config.num_filters + 2;
  std::vector<double> mel_points(points);
  for (std::size_t i = 0; i < points; ++i) {
    mel_points[i] = mel_low + (mel_high - mel_low) * static_cast<double>(i) /
                                  static_cast<double>(points - 1);
  }

  double bin_hz = static_cast<double>(config.sample_rate) /
                  static_cast<double>(config.fft_size);
  for (std::size_t k = 0; k < bank.num_filters; ++k) {
    double left = mel_points[k];
    double center = mel_points[k + 1];
    double right = mel_points[k + 2];
    bank.center_freq_hz[k] = MelToHz(center);
    for (std::size_t bin = 0; bin < bank.num_bins; ++bin) {
      double mel = HzToMel(bin_hz * static_cast<double>(bin));
      double weight = 0.0;
      if (mel >= left && mel <= center) {
        weight = (mel - left) / (center - left);
      } else if (mel > center && mel <= right) {
        weight = (right - mel) / (right - center);
      }
      bank.weights[k * bank.num_bins + bin] = weight;
    }
  }
  return bank;
}

std::vector<double> DctOrthonormalMatrix(std::size_t size) {
  std::vector<double> matrix(size * size);
  double m = static_cast<double>(size);
  double scale0 = std::sqrt(1.0 / m);
  double scale = std::sqrt(2.0 / m);
  for (std::size_t k = 0; k < size; ++k) {
    for (std::size_t n = 0; n < size; ++n) {
      double c = std::cos(std::numbers::pi / m *
                          (static_cast<double>(n) + 0.5) *
                          static_cast<double>(k));
      matrix[k * size + n] = (k == 0 ? scale0 : scale) * c;
    }
  }
  return matrix;
}

FeatureMatrix ComputeMfcc(const AudioStream& stream,
                          const MfccConfig& config) {
  if (stream.samples.size() < config.frame_length) {
    throw Error(ErrorCode::kTooShort,
                "stream " + stream.source_id + " has " +
                    std::to_string(stream.samples.size()) +
                    " samples, need at least " +
                    std::to_string(config.frame_length));
  }
  std::size_t num_frames = NumFrames(stream.samples.size(), config);
  MelFilterbank bank = BuildMelFilterbank(config);
  std::vector<double> window = HammingWindow(config.frame_length);
  std::vector<double> dct = DctOrthonormalMatrix(config.num_filters);

  FeatureMatrix out;
  out.source_id = stream.source_id;
  out.num_frames = num_frames;
  out.num_coeffs = config.num_coeffs;
  out.values.assign(num_frames * config.num_coeffs, 0.0);

  const std::int16_t* samples = stream.samples.data();
  ParallelFor(0, num_frames, [&](std::size_t t) {
    std::size_t offset = t * config.frame_shift;
    std::vector<double> frame(config.frame_length);
    for (std::size_t n = 0; n < config.frame_length; ++n) {
      frame[n] = static_cast<double>(samples[offset + n]) / 32768.0;
    }
    // Pre-emphasis stays inside the frame so framing and emphasis commute;
    // the first sample is emphasized against itself.
    for (std::size_t n = config.frame_length; n-- > 1;) {
      frame[n] -= config.preemphasis * frame[n - 1];
    }
    frame[0] -= config.preemphasis * frame[0];
    for (std::size_t n = 0; n < config.frame_length; ++n) {
      frame[n] *= window[n];
    }

    std::vector<double> magnitude =
        MagnitudeSpectrum(frame.data(), frame.size(), config.fft_size);

    std::vector<double> log_mel(config.num_filters);
    for (std::size_t k = 0; k < config.num_filters; ++k) {
      const double* weights = bank.weights.data() + k * bank.num_bins;
      double energy = 0.0;
      for (std::size_t bin = 0; bin < bank.num_bins; ++bin) {
        energy += weights[bin] * magnitude[bin];
      }
      log_mel[k] = std::log(energy < config.log_floor ? config.log_floor
                                                      : energy);
    }

    double* row = out.values.data() + t * config.num_coeffs;
    for (std::size_t k = 0; k < config.num_coeffs; ++k) {
      const double* basis = dct.data() + k * config.num_filters;
      double acc = 0.0;
      for (std::size_t j = 0; j < config.num_filters; ++j) {
        acc += basis[j] * log_mel[j];
      }
      row[k] = acc;
    }
  });

  for (double v : out.values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite MFCC value in stream " + stream.source_id);
    }
  }
  return out;
}

}  // namespace npc
