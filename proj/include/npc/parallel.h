// include/npc/parallel.h

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

#ifndef NPC_PARALLEL_H_
#define NPC_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace npc {

// Sets the worker count used by ParallelFor.  0 picks the hardware
// concurrency.  Thread-compatible: call before launching work.
void SetNumWorkers(std::size_t workers);

std::size_t GetNumWorkers();

// Runs fn(i) for i in [begin, end).  Iterations are split into contiguous
// chunks, one per worker.  Each index is owned by exactly one worker and
// no worker writes outside its indices, so results are bitwise identical
// for every worker count, including 1.
void ParallelFor(std::size_t begin, std::size_t end,
                 const std::function<void(std::size_t)>& fn);

}  // namespace npc

#endif  // NPC_PARALLEL_H_
