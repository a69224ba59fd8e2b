// include/npc/manifest.h

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

#ifndef NPC_MANIFEST_H_
#define NPC_MANIFEST_H_

#include <cstddef>
#include <string>
#include <vector>

namespace npc {

// One manifest line: `source_id<TAB>path`, optionally followed by a third
// tab-separated column naming a segment file for labeled corpora.
struct ManifestEntry {
  std::string source_id;
  std::string path;
  std::string segments_path;  // empty when unlabeled
  std::size_t line_no = 0;    // 1-based line in the manifest file
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// Speaker turn: frames [start_frame, end_frame) belong to speaker_id.
struct Segment {
  std::string speaker_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
};

// Segments are contiguous, non-overlapping, and cover [0, num_frames).
struct LabeledStream {
  std::string source_id;
  std::vector<Segment> segments;

  std::size_t num_frames() const {
    return segments.empty() ? 0 : segments.back().end_frame;
  }
};

Manifest ReadManifest(const std::string& path);
void WriteManifest(const std::string& path, const Manifest& manifest);

std::vector<Segment> ReadSegmentsFile(const std::string& path);
void WriteSegmentsFile(const std::string& path,
                       const std::vector<Segment>& segments);

// Checks contiguous coverage of [0, last end) and throws CorruptFile with
// the stream id otherwise.
void ValidateSegments(const std::string& source_id,
                      const std::vector<Segment>& segments);

}  // namespace npc

#endif  // NPC_MANIFEST_H_
