// src/wav.cc

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

#include "npc/wav.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "npc/error.h"

namespace npc {

namespace {

std::uint16_t ReadU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::vector<std::uint8_t>* out, std::uint16_t v) {
  out->push_back(static_cast<std::uint8_t>(v & 0xFF));
  out->push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

void PutU32(std::vector<std::uint8_t>* out, std::uint32_t v) {
  out->push_back(static_cast<std::uint8_t>(v & 0xFF));
  out->push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out->push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out->push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void PutTag(std::vector<std::uint8_t>* out, const char* tag) {
  out->insert(out->end(), tag, tag + 4);
}

}  // namespace

AudioStream LoadAudio(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "audio file not found: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open audio file: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kCorruptFile,
                "not a RIFF/WAVE file or truncated header: " + path);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data_chunk = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* header = bytes.data() + pos;
    std::uint32_t chunk_size = ReadU32(header + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      throw Error(ErrorCode::kCorruptFile,
                  "chunk overruns file (truncated?): " + path);
    }
    if (std::memcmp(header, "fmt ", 4) == 0) {
      if (chunk_size < 16) {
        throw Error(ErrorCode::kCorruptFile, "fmt chunk too small: " + path);
      }
      const std::uint8_t* f = bytes.data() + body;
      format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = ReadU32(f + 4);
      bits = ReadU16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(header, "data", 4) == 0) {
      data_chunk = bytes.data() + body;
      data_size = chunk_size;
    }
    // Chunks are word-aligned: odd sizes carry one pad byte.
    pos = body + chunk_size + (chunk_size & 1);
  }

  if (!have_fmt || data_chunk == nullptr) {
    throw Error(ErrorCode::kCorruptFile,
                "missing fmt or data chunk: " + path);
  }
  if (format != 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "format_tag=" + std::to_string(format) +
                    " (PCM required): " + path);
  }
  if (channels != 1) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "channels=" + std::to_string(channels) +
                    " (mono required): " + path);
  }
  if (rate != 16000) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "sample_rate=" + std::to_string(rate) +
                    " (16000 required): " + path);
  }
  if (bits != 16) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "bits_per_sample=" + std::to_string(bits) +
                    " (16 required): " + path);
  }
  if (data_size % 2 != 0) {
    throw Error(ErrorCode::kCorruptFile, "odd PCM16 data size: " + path);
  }

  AudioStream stream;
  stream.sample_rate = rate;
  stream.source_id = std::filesystem::path(path).stem().string();
  std::size_t count = data_size / 2;
  if (count == 0) {
    throw Error(ErrorCode::kCorruptFile, "empty data chunk: " + path);
  }
  stream.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint16_t u = ReadU16(data_chunk + 2 * i);
    stream.samples[i] = static_cast<std::int16_t>(u);
  }
  return stream;
}

void WriteWavPcm16(const std::string& path,
                   const std::vector<std::int16_t>& samples,
                   std::uint32_t sample_rate) {
  std::vector<std::uint8_t> out;
  std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
  out.reserve(44 + data_size);
  PutTag(&out, "RIFF");
  PutU32(&out, 36 + data_size);
  PutTag(&out, "WAVE");
  PutTag(&out, "fmt ");
  PutU32(&out, 16);
  PutU16(&out, 1);  // PCM
  PutU16(&out, 1);  // mono
  PutU32(&out, sample_rate);
  PutU32(&out, sample_rate * 2);  // byte rate
  PutU16(&out, 2);                // block align
  PutU16(&out, 16);               // bits per sample
  PutTag(&out, "data");
  PutU32(&out, data_size);
  for (std::int16_t s : samples) {
    PutU16(&out, static_cast<std::uint16_t>(s));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorCode::kIoError, "cannot write WAV: " + path);
  }
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw Error(ErrorCode::kIoError, "short write: " + path);
  }
}

}  // namespace npc
