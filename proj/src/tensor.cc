// src/tensor.cc

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

#include "npc/tensor.h"

#include <algorithm>

#include "npc/error.h"

namespace npc {

std::size_t ShapeNumel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(ShapeNumel(shape_), 0.0) {}

void Tensor::Fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

void Tensor::Reshape(std::vector<std::size_t> shape) {
  if (ShapeNumel(shape) != data_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "reshape changes the element count");
  }
  shape_ = std::move(shape);
}

}  // namespace npc
