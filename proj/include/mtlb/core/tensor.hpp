// Copyright 2026 The mtlb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTLB__CORE__TENSOR_HPP_
#define MTLB__CORE__TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mtlb
{

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape & shape);
std::string shape_to_string(const Shape & shape);

/**
 * @brief Dense row-major tensor of 64-bit floats.
 *
 * Plain value type. Gradients are not stored here; they live on graph nodes
 * and in the ParameterStore.
 */
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  const Shape & shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const;

  // 2-D helpers; throw DimensionError on other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double> & storage() { return data_; }
  const std::vector<double> & storage() const { return data_; }

  double & operator[](std::size_t i) { return data_[i]; }
  const double & operator[](std::size_t i) const { return data_[i]; }
  double & at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double & at(std::size_t i, std::size_t j, std::size_t k)
  {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const
  {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  double item() const;
  bool all_finite() const;
  Tensor reshaped(Shape shape) const;
  void fill(double value);

  bool operator==(const Tensor & other) const = default;

private:
  Shape shape_;
  std::vector<double> data_;
};

/// Throws NumericError naming `where` when any element is NaN/Inf.
void require_finite(const Tensor & t, const char * where);

}  // namespace mtlb

#endif  // MTLB__CORE__TENSOR_HPP_
