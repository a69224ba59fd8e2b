// include/npc/feature_io.h

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

#ifndef NPC_FEATURE_IO_H_
#define NPC_FEATURE_IO_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace npc {

// Row-major T×m matrix of per-frame values for one stream.  Also reused
// for embedding sequences, where m is the embedding dimension.
struct FeatureMatrix {
  std::string source_id;
  std::size_t num_frames = 0;
  std::size_t num_coeffs = 0;
  std::vector<double> values;

  double At(std::size_t frame, std::size_t coeff) const {
    return values[frame * num_coeffs + coeff];
  }
  const double* Row(std::size_t frame) const {
    return values.data() + frame * num_coeffs;
  }
};

using FeatureStore = std::map<std::string, FeatureMatrix>;

// Binary container: magic, version u32 LE, rows u32, cols u32, then
// rows·cols float32 LE row-major.  Features use magic "NPCF", embedding
// sequences "NPCE".
void WriteFeatureFile(const std::string& path, const FeatureMatrix& matrix);
FeatureMatrix ReadFeatureFile(const std::string& path,
                              const std::string& source_id);

void WriteEmbeddingFile(const std::string& path, const FeatureMatrix& matrix);
FeatureMatrix ReadEmbeddingFile(const std::string& path,
                                const std::string& source_id);

// Reads only the header and returns (rows, cols).  Cheap way to learn T.
std::pair<std::size_t, std::size_t> ReadFeatureFileShape(
    const std::string& path);

}  // namespace npc

#endif  // NPC_FEATURE_IO_H_
