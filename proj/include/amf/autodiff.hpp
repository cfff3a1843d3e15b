#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "amf/tensor.hpp"

namespace amf {

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows into it
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> propagate;
};

}  // namespace detail

/// Handle to a value in the computation graph. Copies share the node;
/// use `detached()` for an independent copy of the value.
class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  /// A leaf whose gradient is tracked and accumulated across backward passes.
  static Var parameter(Tensor value);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  /// In-place access for optimizers and finite-difference probes.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }

  /// Accumulated gradient; a zero tensor of the value's shape if none flowed.
  Tensor grad() const;
  bool has_grad() const { return !node_->grad.empty(); }
  void zero_grad() const;

  /// Fresh leaf holding a copy of the value, same requires_grad flag.
  Var detached() const;

  /// Scalar value of a 1-element tensor.
  Real item() const;

 private:
  friend Var make_op_result(Tensor, std::vector<Var>, std::function<void(detail::Node&)>,
                            const char*);
  friend void backward(const Var&);
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Wires a new op node; throws NonFiniteValue if `value` holds NaN/Inf.
Var make_op_result(Tensor value, std::vector<Var> parents,
                   std::function<void(detail::Node&)> propagate, const char* op_name);

/// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate; callers
/// zero them between steps when they want fresh gradients.
void backward(const Var& loss);

// ---- operations -----------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
/// m[r×c] + bias[1×c] broadcast over rows.
Var add_row_bias(const Var& m, const Var& bias);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, Real factor);
Var tanh(const Var& a);
/// Softmax along each row, with max subtraction.
Var softmax_rows(const Var& m);

std::size_t conv1d_output_length(std::size_t length, std::size_t width, std::size_t stride);
/// Valid (unpadded) temporal convolution.
/// x: [T×F_in], kernels: [F_out×w×F_in] -> [T'×F_out], T' = (T-w)/stride + 1.
Var conv1d(const Var& x, const Var& kernels, std::size_t stride);
/// Valid single-channel 2-D convolution, stride 1.
/// image: [H×W], kernels: [C×kh×kw] -> [(H'·W')×C], one row per output pixel.
Var conv2d(const Var& image, const Var& kernels);

/// Column mean over the leading (time) axis: [T×D] -> [1×D].
Var mean_pool_time(const Var& seq);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var sum(const Var& a);
/// Elementwise mean of equal-shape tensors.
Var mean_of(std::span<const Var> parts);

/// -log softmax(logits)[label], optionally multiplied by class_weights[label].
/// logits: [1×C]; result is 1×1.
Var cross_entropy(const Var& logits, std::size_t label, std::span<const Real> class_weights = {});

}  // namespace amf
