#include <algorithm>
#include <cmath>
#include <string>

#include "amf/autodiff.hpp"
#include "amf/errors.hpp"

namespace amf {

using detail::Node;

namespace {

// Parent gradient buffer, allocated on first use. Null when the parent is not tracked.
Tensor* grad_buffer(Node& node, std::size_t parent) {
  Node& p = *node.parents[parent];
  if (!p.requires_grad) return nullptr;
  if (p.grad.empty()) p.grad = Tensor(p.value.shape());
  return &p.grad;
}

const Tensor& parent_value(const Node& node, std::size_t parent) {
  return node.parents[parent]->value;
}

void require_rank2(const Tensor& t, const char* op, const char* what) {
  if (t.rank() != 2) {
    throw ShapeMismatch(std::string(op) + ": " + what + " must be rank 2, got " +
                        shape_string(t.shape()));
  }
}

// c[m×n] += a[m×k] · b[k×n], with optional transposes of a and b.
void gemm_acc(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c) {
  const std::size_t m = c.rows(), n = c.cols();
  const std::size_t k = ta ? a.rows() : a.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = ta ? a(p, i) : a(i, p);
      if (av == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += av * (tb ? b(j, p) : b(p, j));
    }
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul", "lhs");
  require_rank2(bv, "matmul", "rhs");
  if (av.cols() != bv.rows()) {
    throw ShapeMismatch("matmul: " + shape_string(av.shape()) + " · " + shape_string(bv.shape()));
  }
  Tensor out({av.rows(), bv.cols()});
  gemm_acc(av, false, bv, false, out);
  return make_op_result(std::move(out), {a, b}, [](Node& n) {
    const Tensor& lhs = parent_value(n, 0);
    const Tensor& rhs = parent_value(n, 1);
    if (Tensor* g = grad_buffer(n, 0)) gemm_acc(n.grad, false, rhs, true, *g);
    if (Tensor* g = grad_buffer(n, 1)) gemm_acc(lhs, true, n.grad, false, *g);
  }, "matmul");
}

Var transpose(const Var& a) {
  const Tensor& av = a.value();
  require_rank2(av, "transpose", "input");
  Tensor out({av.cols(), av.rows()});
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(j, i) = av(i, j);
  return make_op_result(std::move(out), {a}, [](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    for (std::size_t i = 0; i < n.grad.rows(); ++i)
      for (std::size_t j = 0; j < n.grad.cols(); ++j) (*g)(j, i) += n.grad(i, j);
  }, "transpose");
}

Var add(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch("add: " + shape_string(a.shape()) + " + " + shape_string(b.shape()));
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_op_result(std::move(out), {a, b}, [](Node& n) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (Tensor* g = grad_buffer(n, p))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i];
    }
  }, "add");
}

Var add_row_bias(const Var& m, const Var& bias) {
  const Tensor& mv = m.value();
  const Tensor& bv = bias.value();
  require_rank2(mv, "add_row_bias", "input");
  if (bv.rank() != 2 || bv.rows() != 1 || bv.cols() != mv.cols()) {
    throw ShapeMismatch("add_row_bias: " + shape_string(mv.shape()) + " + bias " +
                        shape_string(bv.shape()));
  }
  Tensor out = mv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  return make_op_result(std::move(out), {m, bias}, [](Node& n) {
    if (Tensor* g = grad_buffer(n, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i];
    if (Tensor* g = grad_buffer(n, 1))
      for (std::size_t r = 0; r < n.grad.rows(); ++r)
        for (std::size_t c = 0; c < n.grad.cols(); ++c) (*g)(0, c) += n.grad(r, c);
  }, "add_row_bias");
}

Var hadamard(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch("hadamard: " + shape_string(a.shape()) + " ∘ " + shape_string(b.shape()));
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_op_result(std::move(out), {a, b}, [](Node& n) {
    const Tensor& av = parent_value(n, 0);
    const Tensor& bv = parent_value(n, 1);
    if (Tensor* g = grad_buffer(n, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * bv[i];
    if (Tensor* g = grad_buffer(n, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * av[i];
  }, "hadamard");
}

Var scale(const Var& a, Real factor) {
  Tensor out = a.value();
  for (auto& x : out.data()) x *= factor;
  return make_op_result(std::move(out), {a}, [factor](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * factor;
  }, "scale");
}

Var tanh(const Var& a) {
  Tensor out = a.value();
  for (auto& x : out.data()) x = std::tanh(x);
  return make_op_result(std::move(out), {a}, [](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Real y = n.value[i];
      (*g)[i] += n.grad[i] * (1 - y * y);
    }
  }, "tanh");
}

Var softmax_rows(const Var& m) {
  const Tensor& mv = m.value();
  require_rank2(mv, "softmax_rows", "input");
  if (mv.cols() == 0) throw EmptyRow("softmax_rows: rows have zero columns");
  Tensor out(mv.shape());
  for (std::size_t r = 0; r < mv.rows(); ++r) {
    Real top = mv(r, 0);
    for (std::size_t c = 1; c < mv.cols(); ++c) top = std::max(top, mv(r, c));
    Real total = 0;
    for (std::size_t c = 0; c < mv.cols(); ++c) total += out(r, c) = std::exp(mv(r, c) - top);
    for (std::size_t c = 0; c < mv.cols(); ++c) out(r, c) /= total;
  }
  return make_op_result(std::move(out), {m}, [](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    const Tensor& y = n.value;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      Real dot = 0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += n.grad(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) (*g)(r, c) += y(r, c) * (n.grad(r, c) - dot);
    }
  }, "softmax_rows");
}

std::size_t conv1d_output_length(std::size_t length, std::size_t width, std::size_t stride) {
  if (width == 0 || stride == 0) throw ShapeMismatch("conv1d: width and stride must be positive");
  if (width > length) {
    throw KernelTooLong("conv1d: kernel width " + std::to_string(width) +
                        " exceeds sequence length " + std::to_string(length));
  }
  return (length - width) / stride + 1;
}

Var conv1d(const Var& x, const Var& kernels, std::size_t stride) {
  const Tensor& xv = x.value();
  const Tensor& kv = kernels.value();
  require_rank2(xv, "conv1d", "input");
  if (kv.rank() != 3 || kv.shape()[2] != xv.cols()) {
    throw ShapeMismatch("conv1d: kernels " + shape_string(kv.shape()) +
                        " incompatible with input " + shape_string(xv.shape()));
  }
  const std::size_t f_out = kv.shape()[0], width = kv.shape()[1], f_in = kv.shape()[2];
  const std::size_t t_out = conv1d_output_length(xv.rows(), width, stride);
  Tensor out({t_out, f_out});
  const auto xd = xv.data();
  const auto kd = kv.data();
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t o = 0; o < f_out; ++o) {
      Real acc = 0;
      for (std::size_t j = 0; j < width; ++j) {
        const Real* xrow = &xd[(t * stride + j) * f_in];
        const Real* krow = &kd[(o * width + j) * f_in];
        for (std::size_t i = 0; i < f_in; ++i) acc += xrow[i] * krow[i];
      }
      out(t, o) = acc;
    }
  }
  return make_op_result(std::move(out), {x, kernels}, [stride, f_out, width, f_in](Node& n) {
    const auto xd = parent_value(n, 0).data();
    const auto kd = parent_value(n, 1).data();
    Tensor* gx = grad_buffer(n, 0);
    Tensor* gk = grad_buffer(n, 1);
    for (std::size_t t = 0; t < n.grad.rows(); ++t) {
      for (std::size_t o = 0; o < f_out; ++o) {
        const Real up = n.grad(t, o);
        if (up == 0) continue;
        for (std::size_t j = 0; j < width; ++j) {
          const std::size_t xoff = (t * stride + j) * f_in;
          const std::size_t koff = (o * width + j) * f_in;
          for (std::size_t i = 0; i < f_in; ++i) {
            if (gx) (*gx)[xoff + i] += up * kd[koff + i];
            if (gk) (*gk)[koff + i] += up * xd[xoff + i];
          }
        }
      }
    }
  }, "conv1d");
}

Var conv2d(const Var& image, const Var& kernels) {
  const Tensor& iv = image.value();
  const Tensor& kv = kernels.value();
  require_rank2(iv, "conv2d", "image");
  if (kv.rank() != 3) throw ShapeMismatch("conv2d: kernels must be [C×kh×kw], got " + shape_string(kv.shape()));
  const std::size_t channels = kv.shape()[0], kh = kv.shape()[1], kw = kv.shape()[2];
  if (kh == 0 || kw == 0 || kh > iv.rows() || kw > iv.cols()) {
    throw KernelTooLong("conv2d: kernel " + shape_string(kv.shape()) + " does not fit image " +
                        shape_string(iv.shape()));
  }
  const std::size_t oh = iv.rows() - kh + 1, ow = iv.cols() - kw + 1;
  Tensor out({oh * ow, channels});
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      for (std::size_t c = 0; c < channels; ++c) {
        Real acc = 0;
        for (std::size_t dy = 0; dy < kh; ++dy)
          for (std::size_t dx = 0; dx < kw; ++dx)
            acc += iv(y + dy, x + dx) * kv[(c * kh + dy) * kw + dx];
        out(y * ow + x, c) = acc;
      }
  return make_op_result(std::move(out), {image, kernels}, [channels, kh, kw, oh, ow](Node& n) {
    const Tensor& iv = parent_value(n, 0);
    const Tensor& kv = parent_value(n, 1);
    Tensor* gi = grad_buffer(n, 0);
    Tensor* gk = grad_buffer(n, 1);
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t c = 0; c < channels; ++c) {
          const Real up = n.grad(y * ow + x, c);
          if (up == 0) continue;
          for (std::size_t dy = 0; dy < kh; ++dy)
            for (std::size_t dx = 0; dx < kw; ++dx) {
              const std::size_t k = (c * kh + dy) * kw + dx;
              if (gi) (*gi)(y + dy, x + dx) += up * kv[k];
              if (gk) (*gk)[k] += up * iv(y + dy, x + dx);
            }
        }
  }, "conv2d");
}

Var mean_pool_time(const Var& seq) {
  const Tensor& sv = seq.value();
  require_rank2(sv, "mean_pool_time", "input");
  if (sv.rows() == 0) throw EmptySequence("mean_pool_time: sequence has no time steps");
  const std::size_t t = sv.rows(), d = sv.cols();
  Tensor out({1, d});
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t c = 0; c < d; ++c) out(0, c) += sv(r, c);
  for (std::size_t c = 0; c < d; ++c) out(0, c) /= static_cast<Real>(t);
  return make_op_result(std::move(out), {seq}, [t](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    const Real inv = Real(1) / static_cast<Real>(t);
    for (std::size_t r = 0; r < t; ++r)
      for (std::size_t c = 0; c < n.grad.cols(); ++c) (*g)(r, c) += n.grad(0, c) * inv;
  }, "mean_pool_time");
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: nothing to concatenate");
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> offsets;
  std::size_t width = 0;
  for (const auto& p : parts) {
    require_rank2(p.value(), "concat_cols", "part");
    if (p.value().rows() != rows) {
      throw ShapeMismatch("concat_cols: row counts differ (" + shape_string(parts[0].shape()) +
                          " vs " + shape_string(p.shape()) + ")");
    }
    offsets.push_back(width);
    width += p.value().cols();
  }
  Tensor out({rows, width});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offsets[k] + c) = pv(r, c);
  }
  return make_op_result(std::move(out), {parts.begin(), parts.end()}, [offsets](Node& n) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      Tensor* g = grad_buffer(n, k);
      if (!g) continue;
      for (std::size_t r = 0; r < g->rows(); ++r)
        for (std::size_t c = 0; c < g->cols(); ++c) (*g)(r, c) += n.grad(r, offsets[k] + c);
    }
  }, "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: nothing to concatenate");
  const std::size_t cols = parts[0].value().cols();
  std::size_t rows = 0;
  std::vector<Real> data;
  for (const auto& p : parts) {
    require_rank2(p.value(), "concat_rows", "part");
    if (p.value().cols() != cols) {
      throw ShapeMismatch("concat_rows: column counts differ (" + shape_string(parts[0].shape()) +
                          " vs " + shape_string(p.shape()) + ")");
    }
    rows += p.value().rows();
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  return make_op_result(Tensor({rows, cols}, std::move(data)), {parts.begin(), parts.end()},
                        [](Node& n) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < n.parents.size(); ++k) {
      const std::size_t len = n.parents[k]->value.size();
      if (Tensor* g = grad_buffer(n, k))
        for (std::size_t i = 0; i < len; ++i) (*g)[i] += n.grad[offset + i];
      offset += len;
    }
  }, "concat_rows");
}

Var sum(const Var& a) {
  Real total = 0;
  for (Real x : a.value().data()) total += x;
  return make_op_result(Tensor({1, 1}, {total}), {a}, [](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    for (auto& x : g->data()) x += n.grad[0];
  }, "sum");
}

Var mean_of(std::span<const Var> parts) {
  if (parts.empty()) throw EmptyInput("mean_of: no tensors");
  const Shape& shape = parts[0].shape();
  Tensor out(shape);
  for (const auto& p : parts) {
    if (p.shape() != shape) {
      throw ShapeMismatch("mean_of: " + shape_string(shape) + " vs " + shape_string(p.shape()));
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.value()[i];
  }
  const Real inv = Real(1) / static_cast<Real>(parts.size());
  for (auto& x : out.data()) x *= inv;
  return make_op_result(std::move(out), {parts.begin(), parts.end()}, [inv](Node& n) {
    for (std::size_t k = 0; k < n.parents.size(); ++k)
      if (Tensor* g = grad_buffer(n, k))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += n.grad[i] * inv;
  }, "mean_of");
}

Var cross_entropy(const Var& logits, std::size_t label, std::span<const Real> class_weights) {
  const Tensor& z = logits.value();
  if (z.rank() != 2 || z.rows() != 1) {
    throw ShapeMismatch("cross_entropy: logits must be 1×C, got " + shape_string(z.shape()));
  }
  const std::size_t classes = z.cols();
  if (label >= classes) {
    throw LabelOutOfRange("cross_entropy: label " + std::to_string(label) + " not in [0, " +
                          std::to_string(classes) + ")");
  }
  if (!class_weights.empty() && class_weights.size() != classes) {
    throw ShapeMismatch("cross_entropy: " + std::to_string(class_weights.size()) +
                        " class weights for " + std::to_string(classes) + " classes");
  }
  const Real weight = class_weights.empty() ? Real(1) : class_weights[label];

  Real top = z[0];
  for (std::size_t c = 1; c < classes; ++c) top = std::max(top, z[c]);
  Real total = 0;
  for (std::size_t c = 0; c < classes; ++c) total += std::exp(z[c] - top);
  const Real log_norm = top + std::log(total);
  Tensor probs({1, classes});
  for (std::size_t c = 0; c < classes; ++c) probs[c] = std::exp(z[c] - log_norm);

  const Real loss = weight * (log_norm - z[label]);
  return make_op_result(Tensor({1, 1}, {loss}), {logits},
                        [probs = std::move(probs), label, weight](Node& n) {
    Tensor* g = grad_buffer(n, 0);
    const Real up = n.grad[0] * weight;
    for (std::size_t c = 0; c < probs.size(); ++c)
      (*g)[c] += up * (probs[c] - (c == label ? Real(1) : Real(0)));
  }, "cross_entropy");
}

}  // namespace amf
