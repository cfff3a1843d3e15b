#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace amf {

// Working precision. Gradient checks at 1e-4 need 64-bit.
using Real = double;

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array. Extents may be zero so that empty inputs reach the
/// operation that rejects them with a meaningful error.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0);
  Tensor(Shape shape, std::vector<Real> data);

  /// Builds a rank-2 tensor from nested rows; all rows must have equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows);
  static Tensor row(std::initializer_list<Real> values);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // rank-2 helpers
  std::size_t rows() const;
  std::size_t cols() const;
  Real& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }
  const std::vector<Real>& values() const { return data_; }

  /// Row `r` of a rank-2 tensor as a 1×cols tensor.
  Tensor row_at(std::size_t r) const;
  Tensor reshaped(Shape shape) const;

  void fill(Real value);
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

/// Largest absolute elementwise difference; shapes must match.
Real max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace amf
