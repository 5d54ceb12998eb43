// Copyright 2026 The spikeloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spikeloc {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline std::string shape_to_string(const Shape& shape);

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

/// Dense row-major array of rank 1-4 backed by a flat Eigen array.
///
/// The last axis is fastest. Elementwise math goes through array(), which
/// returns the underlying Eigen expression object, so callers write
/// `t.array() * 2 + u.array()` rather than looping.
template <typename Scalar>
class BasicTensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_ = Array::Zero(shape_size(shape_));
  }

  BasicTensor(Shape shape, Array data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape(shape_);
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_to_string(shape_));
    }
  }

  BasicTensor(Shape shape, std::initializer_list<Scalar> values)
      : BasicTensor(std::move(shape), Array::Map(values.begin(), static_cast<Index>(values.size()))) {}

  static BasicTensor Zero(Shape shape) { return BasicTensor(std::move(shape)); }

  static BasicTensor Constant(Shape shape, Scalar value) {
    BasicTensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return data_.size(); }
  bool empty() const { return shape_.empty(); }

  Array& array() { return data_; }
  const Array& array() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  template <typename... Ix>
  Scalar& operator()(Ix... ix) {
    return data_[offset(static_cast<Index>(ix)...)];
  }
  template <typename... Ix>
  Scalar operator()(Ix... ix) const {
    return data_[offset(static_cast<Index>(ix)...)];
  }

  /// Views the tensor as rows x (size / rows) without copying.
  MatrixMap matrix(Index rows) { return MatrixMap(data_.data(), rows, size() / rows); }
  ConstMatrixMap matrix(Index rows) const { return ConstMatrixMap(data_.data(), rows, size() / rows); }

  BasicTensor reshaped(Shape shape) const { return BasicTensor(std::move(shape), data_); }

  /// Slice along the leading axis, e.g. one timestep of a [T,C,H,W] tensor.
  BasicTensor slice(Index i) const {
    Shape inner(shape_.begin() + 1, shape_.end());
    if (inner.empty()) inner = {1};
    const Index n = shape_size(inner);
    return BasicTensor(inner, data_.segment(i * n, n));
  }

  void set_slice(Index i, const BasicTensor& value) {
    const Index n = size() / shape_.front();
    if (value.size() != n) throw std::invalid_argument("slice size mismatch");
    data_.segment(i * n, n) = value.array();
  }

  template <typename Other>
  BasicTensor<Other> cast() const {
    return BasicTensor<Other>(shape_, data_.template cast<Other>());
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && (a.data_ == b.data_).all();
  }

 private:
  static void validate_shape(const Shape& shape) {
    if (shape.empty() || shape.size() > 4) {
      throw std::invalid_argument("tensor rank must be 1-4, got " + std::to_string(shape.size()));
    }
    for (Index e : shape) {
      if (e < 1) throw std::invalid_argument("tensor extents must be >= 1, got " + shape_to_string(shape));
    }
  }

  template <typename... Ix>
  Index offset(Ix... ix) const {
    const Index idx[] = {ix...};
    Index off = 0;
    for (std::size_t a = 0; a < sizeof...(Ix); ++a) off = off * shape_[a] + idx[a];
    return off;
  }

  Shape shape_;
  Array data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;
/// Integer spike counts, time-major [T,C,H,W].
using SpikeTensor = BasicTensor<std::uint8_t>;

inline std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace spikeloc
