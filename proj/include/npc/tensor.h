// include/npc/tensor.h

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

#ifndef NPC_TENSOR_H_
#define NPC_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace npc {

// Dense row-major tensor of doubles.  The last dimension varies fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::initializer_list<std::size_t> shape)
      : Tensor(std::vector<std::size_t>(shape)) {}

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& At(std::size_t i0) { return data_[i0]; }
  double& At(std::size_t i0, std::size_t i1) {
    return data_[i0 * shape_[1] + i1];
  }
  double& At(std::size_t i0, std::size_t i1, std::size_t i2) {
    return data_[(i0 * shape_[1] + i1) * shape_[2] + i2];
  }
  double& At(std::size_t i0, std::size_t i1, std::size_t i2, std::size_t i3) {
    return data_[((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3];
  }
  double At(std::size_t i0) const { return data_[i0]; }
  double At(std::size_t i0, std::size_t i1) const {
    return data_[i0 * shape_[1] + i1];
  }
  double At(std::size_t i0, std::size_t i1, std::size_t i2) const {
    return data_[(i0 * shape_[1] + i1) * shape_[2] + i2];
  }
  double At(std::size_t i0, std::size_t i1, std::size_t i2,
            std::size_t i3) const {
    return data_[((i0 * shape_[1] + i1) * shape_[2] + i2) * shape_[3] + i3];
  }

  void Fill(double value);

  // Requires the element count to stay unchanged.
  void Reshape(std::vector<std::size_t> shape);

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t ShapeNumel(const std::vector<std::size_t>& shape);

}  // namespace npc

#endif  // NPC_TENSOR_H_
