// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef WSEP_TENSOR_HPP_
#define WSEP_TENSOR_HPP_

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wsep/common.hpp"

namespace wsep {

// Dense row-major tensor. Rank 1..3 is all the network code needs.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), T(0));
  }
  Tensor(std::vector<int> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    WSEP_CHECK(static_cast<std::int64_t>(data.size()) == numel_of(shape),
               "tensor data size does not match shape");
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      WSEP_CHECK(d >= 0, "negative tensor dimension");
      n *= d;
    }
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  // 2-D accessors (row major).
  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * dim(1) + c]; }
  T at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * dim(1) + c];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace wsep

#endif  // WSEP_TENSOR_HPP_
