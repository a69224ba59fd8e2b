// include/npc/mfcc.h

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

#ifndef NPC_MFCC_H_
#define NPC_MFCC_H_

#include <complex>
#include <cstddef>
#include <vector>

#include "npc/feature_io.h"
#include "npc/wav.h"

namespace npc {

struct MfccConfig {
  std::size_t sample_rate = 16000;
  std::size_t frame_length = 400;  // 25 ms
  std::size_t frame_shift = 160;   // 10 ms
  std::size_t fft_size = 512;
  std::size_t num_filters = 40;
  std::size_t num_coeffs = 40;
  double low_freq_hz = 20.0;
  double high_freq_hz = 7600.0;
  double preemphasis = 0.97;
  double log_floor = 1e-10;
};

// frames = floor((num_samples - frame_length) / frame_shift) + 1
std::size_t NumFrames(std::size_t num_samples, const MfccConfig& config);

// Full pipeline: scale to [-1, 1) -> per-frame pre-emphasis -> Hamming
// window -> magnitude FFT -> triangular mel filterbank -> floored natural
// log -> orthonormal DCT-II.  Pre-emphasis is applied inside each frame,
// with the first sample emphasized against itself, so that shifting the
// input by one hop shifts the output by exactly one frame.
FeatureMatrix ComputeMfcc(const AudioStream& stream,
                          const MfccConfig& config = MfccConfig());

// Pieces exposed for direct verification.

double HzToMel(double hz);
double MelToHz(double mel);

struct MelFilterbank {
  std::size_t num_filters = 0;
  std::size_t num_bins = 0;            // fft_size / 2 + 1
  std::vector<double> weights;         // num_filters × num_bins, row-major
  std::vector<double> center_freq_hz;  // one per filter

  double Weight(std::size_t filter, std::size_t bin) const {
    return weights[filter * num_bins + bin];
  }
};

MelFilterbank BuildMelFilterbank(const MfccConfig& config);

// In-place iterative radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>* buffer);

// Magnitude spectrum of a zero-padded real frame: bins 0..fft_size/2.
std::vector<double> MagnitudeSpectrum(const double* frame, std::size_t n,
                                      std::size_t fft_size);

// Orthonormal DCT-II matrix, size×size, row-major; rows are basis vectors.
// Multiplying by the matrix and then by its transpose is the identity.
std::vector<double> DctOrthonormalMatrix(std::size_t size);

std::vector<double> HammingWindow(std::size_t length);

}  // namespace npc

#endif  // NPC_MFCC_H_
