#include "xsql/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xsql {

namespace {

std::size_t checked_count(const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw std::invalid_argument("tensor rank must be 1 or 2, got " + shape_string(shape));
  }
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) {
      throw std::invalid_argument("tensor dimensions must be positive, got " + shape_string(shape));
    }
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape_in, std::vector<Real> values_in)
    : shape(std::move(shape_in)), values(std::move(values_in)) {
  if (checked_count(shape) != values.size()) {
    throw std::invalid_argument("tensor value count " + std::to_string(values.size()) +
                                " does not match shape " + shape_string(shape));
  }
}

Tensor Tensor::zeros(std::vector<int> shape_in) {
  std::size_t n = checked_count(shape_in);
  return Tensor(std::move(shape_in), std::vector<Real>(n, 0.0));
}

Tensor Tensor::full(std::vector<int> shape_in, Real v) {
  std::size_t n = checked_count(shape_in);
  return Tensor(std::move(shape_in), std::vector<Real>(n, v));
}

Tensor Tensor::scalar(Real v) { return Tensor({1}, {v}); }

Tensor Tensor::vector(std::vector<Real> v) {
  int n = static_cast<int>(v.size());
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<Real> v) {
  return Tensor({rows, cols}, std::move(v));
}

Real Tensor::item() const {
  if (values.size() != 1) {
    throw std::logic_error("item() on non-scalar tensor of shape " + shape_string(shape));
  }
  return values[0];
}

bool Tensor::all_finite() const {
  for (Real v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  s += "]";
  return s;
}

}  // namespace xsql
