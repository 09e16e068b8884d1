/*
Copyright 2026 The qreadout Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef QREADOUT_NN_TENSOR_HPP_
#define QREADOUT_NN_TENSOR_HPP_

#include <functional>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qreadout/common.hpp"

namespace qreadout::nn {

using Shape = std::vector<std::size_t>;

// Storage at Eigen's maximum alignment, so vectorized kernels take the same
// path for every buffer and results do not depend on the allocation address.
template <class T>
using Buffer = std::vector<T, Eigen::aligned_allocator<T>>;

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < s.size(); ++k) os << (k ? "," : "") << s[k];
  os << ']';
  return os.str();
}

/// Dense row-major array, (batch, channel, length) or (batch, features).
template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Tensor(Shape shape, std::initializer_list<T> data)
      : Tensor(std::move(shape), Buffer<T>(data)) {}
  Tensor(Shape shape, const std::vector<T>& data)
      : Tensor(std::move(shape), Buffer<T>(data.begin(), data.end())) {}
  Tensor(Shape shape, Buffer<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_))
      throw ShapeError("tensor data has " + std::to_string(data_.size()) +
                       " values for shape " + shape_string(shape_));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t k) const { return shape_.at(k); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  Buffer<T>& values() { return data_; }
  const Buffer<T>& values() const { return data_; }

  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }

  T& at(std::size_t a, std::size_t b) { return data_[a * shape_[1] + b]; }
  const T& at(std::size_t a, std::size_t b) const {
    return data_[a * shape_[1] + b];
  }
  T& at(std::size_t a, std::size_t b, std::size_t c) {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }
  const T& at(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * shape_[1] + b) * shape_[2] + c];
  }

  void reshape(Shape s) {
    if (shape_size(s) != data_.size())
      throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                       shape_string(s));
    shape_ = std::move(s);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  template <class U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, Buffer<U>(data_.begin(), data_.end()));
  }

 private:
  Shape shape_;
  Buffer<T> data_;
};

}  // namespace qreadout::nn

#endif  // QREADOUT_NN_TENSOR_HPP_
