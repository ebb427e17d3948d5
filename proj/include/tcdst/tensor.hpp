#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "tcdst/error.hpp"

namespace tcdst {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  if (s.empty()) throw DimensionError("empty shape");
  std::size_t n = 1;
  for (std::size_t d : s) {
    if (d == 0) throw DimensionError("zero dimension in shape");
    n *= d;
  }
  return n;
}

// Dense row-major tensor. Rank 1 is treated as a row vector by the
// 2-D views below. grad is non-empty only after a backward pass and
// only when requires_grad is set.
template <class T>
struct TensorData {
  Shape shape;
  std::vector<T> values;
  bool requires_grad = false;
  std::vector<T> grad;

  TensorData() = default;
  explicit TensorData(Shape s) : shape(std::move(s)), values(shape_numel(shape), T(0)) {}
  TensorData(Shape s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    if (shape_numel(shape) != values.size())
      throw DimensionError("shape does not match value count");
  }

  std::size_t numel() const { return values.size(); }

  std::size_t rows() const {
    if (shape.size() == 1) return 1;
    if (shape.size() == 2) return shape[0];
    throw DimensionError("tensor is not 2-d");
  }
  std::size_t cols() const {
    if (shape.size() == 1) return shape[0];
    if (shape.size() == 2) return shape[1];
    throw DimensionError("tensor is not 2-d");
  }
};

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace tcdst
