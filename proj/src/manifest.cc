// src/manifest.cc

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

#include "npc/manifest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "npc/error.h"

namespace npc {

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::size_t ParseFrameIndex(const std::string& text, const std::string& path,
                            std::size_t line_number) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kCorruptFile,
                path + ":" + std::to_string(line_number) +
                    ": bad frame index '" + text + "'");
  }
}

}  // namespace

Manifest ReadManifest(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "manifest not found: " + path);
  }
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open manifest: " + path);
  }
  Manifest manifest;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() ||
        fields[1].empty()) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_number) +
                      ": expected source_id<TAB>path[<TAB>segments]");
    }
    if (!seen.insert(fields[0]).second) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_number) +
                      ": duplicate source_id '" + fields[0] + "'");
    }
    ManifestEntry entry;
    entry.source_id = fields[0];
    entry.path = fields[1];
    if (fields.size() == 3) entry.segments_path = fields[2];
    entry.line_no = line_number;
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void WriteManifest(const std::string& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write manifest: " + path);
  }
  for (const ManifestEntry& entry : manifest.entries) {
    out << entry.source_id << '\t' << entry.path;
    if (!entry.segments_path.empty()) out << '\t' << entry.segments_path;
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write: " + path);
  }
}

std::vector<Segment> ReadSegmentsFile(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "segments file not found: " + path);
  }
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open segments: " + path);
  }
  std::vector<Segment> segments;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 3 || fields[0].empty()) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ":" + std::to_string(line_number) +
                      ": expected speaker_id<TAB>start<TAB>end");
    }
    Segment seg;
    seg.speaker_id = fields[0];
    seg.start_frame = ParseFrameIndex(fields[1], path, line_number);
    seg.end_frame = ParseFrameIndex(fields[2], path, line_number);
    segments.push_back(std::move(seg));
  }
  return segments;
}

void WriteSegmentsFile(const std::string& path,
                       const std::vector<Segment>& segments) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write segments: " + path);
  }
  for (const Segment& seg : segments) {
    out << seg.speaker_id << '\t' << seg.start_frame << '\t' << seg.end_frame
        << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write: " + path);
  }
}

void ValidateSegments(const std::string& source_id,
                      const std::vector<Segment>& segments) {
  if (segments.empty()) {
    throw Error(ErrorCode::kCorruptFile,
                "stream " + source_id + ": no segments");
  }
  std::size_t expected_start = 0;
  for (const Segment& seg : segments) {
    if (seg.start_frame != expected_start || seg.end_frame <= seg.start_frame) {
      std::ostringstream msg;
      msg << "stream " << source_id << ": segment [" << seg.start_frame << ", "
          << seg.end_frame << ") breaks contiguous coverage (expected start "
          << expected_start << ")";
      throw Error(ErrorCode::kCorruptFile, msg.str());
    }
    expected_start = seg.end_frame;
  }
}

}  // namespace npc
