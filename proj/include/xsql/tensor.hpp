#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace xsql {

using Real = double;

/// Dense row-major tensor of rank 1 or 2. Rank-1 tensors behave as row
/// vectors in matrix ops; scalars are rank-1 tensors with a single value.
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> values;

  Tensor() = default;
  Tensor(std::vector<int> shape_in, std::vector<Real> values_in);

  static Tensor zeros(std::vector<int> shape_in);
  static Tensor full(std::vector<int> shape_in, Real v);
  static Tensor scalar(Real v);
  static Tensor vector(std::vector<Real> v);
  static Tensor matrix(int rows, int cols, std::vector<Real> v);

  int rows() const { return shape.size() == 2 ? shape[0] : 1; }
  int cols() const {
    if (shape.empty()) return 0;
    return shape.size() == 2 ? shape[1] : shape[0];
  }
  std::size_t size() const { return values.size(); }

  Real& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols() + c]; }
  Real at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols() + c]; }

  Real item() const;

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
};

std::string shape_string(const std::vector<int>& shape);

}  // namespace xsql
