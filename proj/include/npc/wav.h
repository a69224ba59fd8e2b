// include/npc/wav.h

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

#ifndef NPC_WAV_H_
#define NPC_WAV_H_

#include <cstdint>
#include <string>
#include <vector>

namespace npc {

// Mono 16 kHz PCM16 audio, the only input format the pipeline accepts.
struct AudioStream {
  std::string source_id;
  std::uint32_t sample_rate = 16000;
  std::vector<std::int16_t> samples;
};

// Reads a RIFF/WAVE file.  Accepts PCM16, mono, 16000 Hz only; anything
// else raises UnsupportedFormat naming the offending parameter.
AudioStream LoadAudio(const std::string& path);

// Writes samples as a mono 16 kHz PCM16 WAV.  Used by corpus synthesis.
void WriteWavPcm16(const std::string& path,
                   const std::vector<std::int16_t>& samples,
                   std::uint32_t sample_rate = 16000);

}  // namespace npc

#endif  // NPC_WAV_H_
