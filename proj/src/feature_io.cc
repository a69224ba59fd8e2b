// src/feature_io.cc

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

#include "npc/feature_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "npc/error.h"

namespace npc {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void PutU32(std::string* out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
               static_cast<char>((v >> 16) & 0xFF),
               static_cast<char>((v >> 24) & 0xFF)};
  out->append(b, 4);
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void WriteMatrixFile(const std::string& path, const char* magic,
                     const FeatureMatrix& matrix) {
  std::string out;
  out.reserve(16 + matrix.values.size() * 4);
  out.append(magic, 4);
  PutU32(&out, kFormatVersion);
  PutU32(&out, static_cast<std::uint32_t>(matrix.num_frames));
  PutU32(&out, static_cast<std::uint32_t>(matrix.num_coeffs));
  for (double v : matrix.values) {
    PutU32(&out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorCode::kIoError, "cannot write: " + path);
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw Error(ErrorCode::kIoError, "short write: " + path);
  }
}

FeatureMatrix ReadMatrixFile(const std::string& path, const char* magic,
                             const std::string& source_id) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "feature file not found: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 16) {
    throw Error(ErrorCode::kCorruptFile, "truncated header: " + path);
  }
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw Error(ErrorCode::kCorruptFile,
                std::string("bad magic (expected ") + magic + "): " + path);
  }
  std::uint32_t version = GetU32(bytes.data() + 4);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported version " + std::to_string(version) + ": " +
                    path);
  }
  std::size_t rows = GetU32(bytes.data() + 8);
  std::size_t cols = GetU32(bytes.data() + 12);
  std::size_t expected = 16 + rows * cols * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kCorruptFile,
                "size mismatch (" + std::to_string(bytes.size()) + " vs " +
                    std::to_string(expected) + "): " + path);
  }
  FeatureMatrix matrix;
  matrix.source_id = source_id;
  matrix.num_frames = rows;
  matrix.num_coeffs = cols;
  matrix.values.resize(rows * cols);
  const std::uint8_t* p = bytes.data() + 16;
  for (std::size_t i = 0; i < matrix.values.size(); ++i) {
    matrix.values[i] =
        static_cast<double>(std::bit_cast<float>(GetU32(p + 4 * i)));
  }
  return matrix;
}

std::pair<std::size_t, std::size_t> ReadShape(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "feature file not found: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  std::uint8_t header[16];
  in.read(reinterpret_cast<char*>(header), 16);
  if (in.gcount() != 16) {
    throw Error(ErrorCode::kCorruptFile, "truncated header: " + path);
  }
  if (std::memcmp(header, "NPCF", 4) != 0 &&
      std::memcmp(header, "NPCE", 4) != 0) {
    throw Error(ErrorCode::kCorruptFile, "bad magic: " + path);
  }
  return {GetU32(header + 8), GetU32(header + 12)};
}

}  // namespace

void WriteFeatureFile(const std::string& path, const FeatureMatrix& matrix) {
  WriteMatrixFile(path, "NPCF", matrix);
}

FeatureMatrix ReadFeatureFile(const std::string& path,
                              const std::string& source_id) {
  return ReadMatrixFile(path, "NPCF", source_id);
}

void WriteEmbeddingFile(const std::string& path, const FeatureMatrix& matrix) {
  WriteMatrixFile(path, "NPCE", matrix);
}

FeatureMatrix ReadEmbeddingFile(const std::string& path,
                                const std::string& source_id) {
  return ReadMatrixFile(path, "NPCE", source_id);
}

std::pair<std::size_t, std::size_t> ReadFeatureFileShape(
    const std::string& path) {
  return ReadShape(path);
}

}  // namespace npc
