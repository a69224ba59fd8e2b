// src/checkpoint.cc

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

#include "npc/checkpoint.h"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "npc/error.h"

namespace npc {

namespace {

constexpr char kMagic[4] = {'N', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::array<std::uint32_t, 256> BuildCrcTable() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int bit = 0; bit < 8; ++bit) {
      c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    table[i] = c;
  }
  return table;
}

void AppendU16(std::vector<std::uint8_t>* out, std::uint16_t v) {
  out->push_back(static_cast<std::uint8_t>(v & 0xFF));
  out->push_back(static_cast<std::uint8_t>(v >> 8));
}

void AppendU32(std::vector<std::uint8_t>* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out->push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void AppendF32(std::vector<std::uint8_t>* out, float v) {
  AppendU32(out, std::bit_cast<std::uint32_t>(v));
}

void AppendTensor(std::vector<std::uint8_t>* out, const std::string& name,
                  const Tensor& tensor) {
  if (name.size() > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "tensor name too long: " + name);
  }
  AppendU16(out, static_cast<std::uint16_t>(name.size()));
  out->insert(out->end(), name.begin(), name.end());
  out->push_back(static_cast<std::uint8_t>(tensor.rank()));
  for (std::size_t d = 0; d < tensor.rank(); ++d) {
    AppendU32(out, static_cast<std::uint32_t>(tensor.dim(d)));
  }
  const double* p = tensor.data();
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    AppendF32(out, static_cast<float>(p[i]));
  }
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, const std::string& path)
      : data_(data), size_(size), path_(path) {}

  std::uint8_t U8() {
    Need(1);
    return data_[pos_++];
  }

  std::uint16_t U16() {
    Need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_]) |
                      static_cast<std::uint16_t>(data_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string Str(std::size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  double F32() { return static_cast<double>(std::bit_cast<float>(U32())); }

  bool Done() const { return pos_ == size_; }

 private:
  void Need(std::size_t n) {
    if (pos_ + n > size_) {
      throw Error(ErrorCode::kCorruptFile,
                  path_ + ": checkpoint record overruns the file");
    }
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

// Architecture and loss metadata packed as a rank-1 tensor of small
// integers: frames, coeffs, embedding dim, head_batchnorm, trained loss,
// conv count, then kernel/channels per conv.
Tensor PackMeta(const ModelParams& params) {
  const ArchitectureSpec& s = params.spec;
  std::vector<double> v = {
      static_cast<double>(s.input_frames),
      static_cast<double>(s.input_coeffs),
      static_cast<double>(s.embedding_dim),
      s.head_batchnorm ? 1.0 : 0.0,
      params.trained_loss == LossKind::kCosine ? 1.0 : 0.0,
      static_cast<double>(s.convs.size())};
  for (const ConvLayerSpec& conv : s.convs) {
    v.push_back(static_cast<double>(conv.kernel));
    v.push_back(static_cast<double>(conv.channels));
  }
  Tensor meta({v.size()});
  std::copy(v.begin(), v.end(), meta.data());
  return meta;
}

void UnpackMeta(const Tensor& meta, ModelParams* params,
                const std::string& path) {
  if (meta.rank() != 1 || meta.size() < 6) {
    throw Error(ErrorCode::kCorruptFile, path + ": malformed meta tensor");
  }
  const double* v = meta.data();
  ArchitectureSpec spec;
  spec.input_frames = static_cast<std::size_t>(v[0]);
  spec.input_coeffs = static_cast<std::size_t>(v[1]);
  spec.embedding_dim = static_cast<std::size_t>(v[2]);
  spec.head_batchnorm = v[3] != 0.0;
  params->trained_loss = v[4] != 0.0 ? LossKind::kCosine : LossKind::kCrossEntropy;
  std::size_t convs = static_cast<std::size_t>(v[5]);
  if (meta.size() != 6 + 2 * convs) {
    throw Error(ErrorCode::kCorruptFile, path + ": malformed meta tensor");
  }
  spec.convs.clear();
  for (std::size_t i = 0; i < convs; ++i) {
    spec.convs.push_back(ConvLayerSpec{
        static_cast<std::size_t>(v[6 + 2 * i]),
        static_cast<std::size_t>(v[7 + 2 * i])});
  }
  params->spec = spec;
}

}  // namespace

std::uint32_t Crc32(const std::uint8_t* data, std::size_t size) {
  static const std::array<std::uint32_t, 256> table = BuildCrcTable();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) {
    crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

void SaveCheckpoint(const ModelParams& params, const RmsPropState* opt_state,
                    const std::string& path) {
  std::vector<std::uint8_t> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  AppendU32(&bytes, kVersion);

  ModelParams& mutable_params = const_cast<ModelParams&>(params);
  std::vector<NamedTensor> tensors = AllTensors(&mutable_params);
  std::size_t count = 1 + tensors.size();
  if (opt_state != nullptr) {
    count += opt_state->accumulators.size() + 1;  // opt.acc* and opt.step
  }
  AppendU32(&bytes, static_cast<std::uint32_t>(count));

  AppendTensor(&bytes, "meta", PackMeta(params));
  for (const NamedTensor& named : tensors) {
    AppendTensor(&bytes, named.name, *named.tensor);
  }
  if (opt_state != nullptr) {
    for (std::size_t i = 0; i < opt_state->accumulators.size(); ++i) {
      AppendTensor(&bytes, "opt.acc" + std::to_string(i),
                   opt_state->accumulators[i]);
    }
    Tensor step({1});
    step[0] = static_cast<double>(opt_state->step);
    AppendTensor(&bytes, "opt.step", step);
  }
  AppendU32(&bytes, Crc32(bytes.data(), bytes.size()));

  std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoError, "cannot open for writing: " + temp);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(ErrorCode::kIoError, "short write: " + temp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::kIoError, "cannot replace " + path);
  }
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open: " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4) {
    throw Error(ErrorCode::kChecksumMismatch, path + ": file too short");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kVersionMismatch,
                path + ": not a checkpoint file (bad magic)");
  }
  // Integrity before structure: a truncated or bit-flipped file fails here.
  if (bytes.size() < 12) {
    throw Error(ErrorCode::kChecksumMismatch, path + ": file too short");
  }
  std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  }
  if (Crc32(bytes.data(), body) != stored) {
    throw Error(ErrorCode::kChecksumMismatch, path + ": checksum mismatch");
  }

  Reader reader(bytes.data() + 4, body - 4, path);
  std::uint32_t version = reader.U32();
  if (version != kVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                path + ": checkpoint version " + std::to_string(version) +
                    " (expected " + std::to_string(kVersion) + ")");
  }
  std::uint32_t count = reader.U32();
  std::map<std::string, Tensor> loaded;
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = reader.Str(reader.U16());
    std::size_t rank = reader.U8();
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (std::size_t d = 0; d < rank; ++d) {
      shape[d] = reader.U32();
      numel *= shape[d];
    }
    Tensor tensor(shape);
    double* p = tensor.data();
    for (std::size_t i = 0; i < numel; ++i) p[i] = reader.F32();
    if (!loaded.emplace(std::move(name), std::move(tensor)).second) {
      throw Error(ErrorCode::kCorruptFile, path + ": duplicate tensor name");
    }
  }
  if (!reader.Done()) {
    throw Error(ErrorCode::kCorruptFile, path + ": trailing bytes after tensors");
  }

  auto meta_it = loaded.find("meta");
  if (meta_it == loaded.end()) {
    throw Error(ErrorCode::kCorruptFile, path + ": missing meta tensor");
  }
  Checkpoint ckpt;
  UnpackMeta(meta_it->second, &ckpt.params, path);
  ckpt.params.conv.resize(ckpt.params.spec.convs.size());

  std::vector<NamedTensor> slots = AllTensors(&ckpt.params);
  for (NamedTensor& slot : slots) {
    auto it = loaded.find(slot.name);
    if (it == loaded.end()) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ": missing tensor " + slot.name);
    }
    *slot.tensor = std::move(it->second);
  }

  // Shape sanity against the declared architecture.
  ModelParams reference = BuildModel(ckpt.params.spec, 0);
  reference.trained_loss = ckpt.params.trained_loss;
  std::vector<NamedTensor> expected = AllTensors(&reference);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!slots[i].tensor->SameShape(*expected[i].tensor)) {
      throw Error(ErrorCode::kCorruptFile,
                  path + ": tensor " + slots[i].name +
                      " does not match the declared architecture");
    }
  }

  if (loaded.count("opt.step") != 0) {
    RmsPropState state;
    state.step = static_cast<std::uint64_t>(loaded.at("opt.step")[0]);
    std::vector<NamedTensor> learnable = LearnableTensors(&ckpt.params);
    for (std::size_t i = 0; i < learnable.size(); ++i) {
      auto it = loaded.find("opt.acc" + std::to_string(i));
      if (it == loaded.end()) {
        throw Error(ErrorCode::kCorruptFile,
                    path + ": optimizer state is incomplete");
      }
      if (!it->second.SameShape(*learnable[i].tensor)) {
        throw Error(ErrorCode::kCorruptFile,
                    path + ": optimizer accumulator " + std::to_string(i) +
                        " has the wrong shape");
      }
      state.accumulators.push_back(std::move(it->second));
    }
    ckpt.opt_state = std::move(state);
  }
  return ckpt;
}

}  // namespace npc
