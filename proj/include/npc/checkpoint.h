// include/npc/checkpoint.h

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

#ifndef NPC_CHECKPOINT_H_
#define NPC_CHECKPOINT_H_

#include <cstdint>
#include <optional>
#include <string>

#include "npc/model.h"
#include "npc/optimizer.h"

namespace npc {

// Checkpoint container: magic "NPCK", version u32 LE, tensor count u32 LE;
// per tensor: name length u16 LE + UTF-8 name, rank u8, dims u32 LE each,
// float32 LE payload; trailing CRC32 of all preceding bytes.  Writes go to
// a temp file renamed into place.
void SaveCheckpoint(const ModelParams& params, const RmsPropState* opt_state,
                    const std::string& path);

struct Checkpoint {
  ModelParams params;
  std::optional<RmsPropState> opt_state;
};

Checkpoint LoadCheckpoint(const std::string& path);

// IEEE CRC-32 (polynomial 0xEDB88320, reflected), as used by zip/PNG.
std::uint32_t Crc32(const std::uint8_t* data, std::size_t size);

}  // namespace npc

#endif  // NPC_CHECKPOINT_H_
