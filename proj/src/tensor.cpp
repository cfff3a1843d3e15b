#include "amf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "amf/errors.hpp"

namespace amf {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ShapeMismatch("tensor shape " + shape_string(shape_) + " needs " +
                        std::to_string(shape_size(shape_)) + " values, got " +
                        std::to_string(data_.size()));
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<Real>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
  std::vector<Real> data;
  data.reserve(n_rows * n_cols);
  for (const auto& r : rows) {
    if (r.size() != n_cols) throw ShapeMismatch("ragged rows in Tensor::matrix");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({n_rows, n_cols}, std::move(data));
}

Tensor Tensor::row(std::initializer_list<Real> values) {
  return Tensor({1, values.size()}, std::vector<Real>(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) throw ShapeMismatch("rows() on a rank-0 tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) {
    throw ShapeMismatch("cols() needs a rank-2 tensor, got " + shape_string(shape_));
  }
  return shape_[1];
}

Tensor Tensor::row_at(std::size_t r) const {
  const std::size_t c = cols();
  if (r >= rows()) throw ShapeMismatch("row index out of range");
  return Tensor({1, c}, std::vector<Real>(data_.begin() + r * c, data_.begin() + (r + 1) * c));
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real x) { return std::isfinite(x); });
}

Real max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch("max_abs_diff: " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
  Real m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace amf
