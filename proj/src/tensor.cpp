// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "kernels.hpp"
#include "signforge/errors.hpp"

namespace sf {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

namespace {

thread_local bool g_grad_enabled = true;

constexpr double kMaskedScore = -1e9;

std::size_t rows_of(const Shape& shape) {
  return shape.empty() ? 1 : shape_numel(shape) / std::max<std::size_t>(1, shape.back());
}

void check_shape(const Shape& shape) {
  for (auto extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
}

Tensor make_op(Shape shape, std::vector<Real> data, std::initializer_list<Tensor> inputs,
               std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (g_grad_enabled) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || in.requires_grad();
    if (needs) {
      node->requires_grad = true;
      node->leaf = false;
      for (const auto& in : inputs) node->parents.push_back(in.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

// True when `suffix` equals the trailing dimensions of `shape`.
bool is_suffix(const Shape& suffix, const Shape& shape) {
  if (suffix.size() > shape.size()) return false;
  return std::equal(suffix.begin(), suffix.end(), shape.end() - static_cast<std::ptrdiff_t>(suffix.size()));
}

Tensor add_impl(const Tensor& a, const Tensor& b, Real sign) {
  if (a.shape() == b.shape()) {
    std::vector<Real> out(a.numel());
    const auto ad = a.data();
    const auto bd = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + sign * bd[i];
    return make_op(a.shape(), std::move(out), {a, b}, [sign](Node& self) {
      const std::size_t n = self.grad.size();
      if (self.parents[0]->requires_grad) {
        Real* ga = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[i];
      }
      if (self.parents[1]->requires_grad) {
        Real* gb = self.parents[1]->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) gb[i] += sign * self.grad[i];
      }
    });
  }
  if (!is_suffix(b.shape(), a.shape())) {
    throw DimensionError("cannot broadcast " + shape_str(b.shape()) + " onto " + shape_str(a.shape()));
  }
  const std::size_t inner = b.numel();
  const std::size_t outer = a.numel() / inner;
  std::vector<Real> out(a.numel());
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) out[o * inner + j] = ad[o * inner + j] + sign * bd[j];
  }
  return make_op(a.shape(), std::move(out), {a, b}, [sign, inner, outer](Node& self) {
    if (self.parents[0]->requires_grad) {
      Real* ga = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (self.parents[1]->requires_grad) {
      Real* gb = self.parents[1]->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < inner; ++j) gb[j] += sign * self.grad[o * inner + j];
      }
    }
  });
}

// Shared backward for softmax over the last axis: dx = y * (g - <g, y>).
void softmax_rows_backward(Node& self, std::size_t width) {
  if (!self.parents[0]->requires_grad) return;
  Real* gx = self.parents[0]->grad_buffer();
  const std::size_t rows = self.data.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* y = self.data.data() + r * width;
    const Real* g = self.grad.data() + r * width;
    double dot = 0.0;
    for (std::size_t j = 0; j < width; ++j) dot += static_cast<double>(g[j]) * y[j];
    for (std::size_t j = 0; j < width; ++j) {
      gx[r * width + j] += static_cast<Real>(y[j] * (g[j] - dot));
    }
  }
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(Shape shape, Real fill) : node_(std::make_shared<Node>()) {
  check_shape(shape);
  node_->data.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<Real> values) : node_(std::make_shared<Node>()) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

Tensor Tensor::scalar(Real value) { return Tensor(Shape{}, std::vector<Real>{value}); }

Tensor Tensor::parameter(Shape shape, std::vector<Real> values) {
  Tensor t(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

std::size_t Tensor::dim(int axis) const {
  const int r = static_cast<int>(rank());
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for " + shape_str(shape()));
  }
  return shape()[static_cast<std::size_t>(a)];
}

Real Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

void Tensor::set_requires_grad(bool value) {
  if (!node_->leaf) throw ContractError("requires_grad can only be changed on leaf tensors");
  node_->requires_grad = value;
}

void Tensor::zero_grad() {
  node_->grad.clear();
  node_->grad_dirty = false;
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->data); }

void Tensor::backward() const {
  if (numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_str(shape()));
  }
  if (!node_->requires_grad) throw ContractError("backward() on a tensor without a gradient path");

  // Iterative post-order DFS gives a topological order of the graph.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->leaf && n->grad_dirty) {
      throw ContractError("gradient of a " + shape_str(n->shape) +
                          " parameter was not zeroed before backward()");
    }
  }
  for (Node* n : order) {
    if (!n->leaf) n->grad.clear();
  }
  node_->grad_buffer()[0] = Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  for (Node* n : order) {
    if (n->leaf) {
      n->grad_buffer();
      n->grad_dirty = true;
    }
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// ---------------------------------------------------------------------------
// Elementwise

Tensor add(const Tensor& a, const Tensor& b) { return add_impl(a, b, Real(1)); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_impl(a, b, Real(-1)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const Node& pa = *self.parents[0];
    const Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      Real* ga = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * pb.data[i];
    }
    if (pb.requires_grad) {
      Real* gb = self.parents[1]->grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i] * pa.data[i];
    }
  });
}

Tensor scale(const Tensor& a, Real factor) {
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return make_op(a.shape(), std::move(out), {a}, [factor](Node& self) {
    Real* ga = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * factor;
  });
}

Tensor relu(const Tensor& a) {
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > Real(0) ? a[i] : Real(0);
  return make_op(a.shape(), std::move(out), {a}, [](Node& self) {
    Real* ga = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (self.data[i] > Real(0)) ga[i] += self.grad[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Products

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() != 2 || a.shape().back() != b.shape()[0]) {
    throw DimensionError("matmul shape mismatch: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const std::size_t k = b.shape()[0];
  const std::size_t n = b.shape()[1];
  const std::size_t m = a.numel() / k;
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<Real> out(m * n);
  kernels::gemm(false, false, m, n, k, a.data().data(), b.data().data(), out.data(), false);
  return make_op(std::move(out_shape), std::move(out), {a, b}, [m, n, k](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      kernels::gemm(false, true, m, k, n, self.grad.data(), pb.data.data(), pa.grad_buffer(), true);
    }
    if (pb.requires_grad) {
      kernels::gemm(true, false, k, n, m, pa.data.data(), self.grad.data(), pb.grad_buffer(), true);
    }
  });
}

Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b) {
  const bool ranks_ok = a.rank() >= 3 && a.rank() == b.rank() &&
                        std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin());
  const std::size_t m = a.rank() >= 2 ? a.dim(-2) : 0;
  const std::size_t k = a.rank() >= 2 ? a.dim(-1) : 0;
  const std::size_t bk = b.rank() >= 2 ? (transpose_b ? b.dim(-1) : b.dim(-2)) : 0;
  if (!ranks_ok || k != bk) {
    throw DimensionError(std::string("bmm shape mismatch: ") + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()) + (transpose_b ? "^T" : ""));
  }
  const std::size_t n = transpose_b ? b.dim(-2) : b.dim(-1);
  const std::size_t batch = a.numel() / (m * k);
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<Real> out(batch * m * n);
  for (std::size_t i = 0; i < batch; ++i) {
    kernels::gemm(false, transpose_b, m, n, k, a.data().data() + i * m * k,
                  b.data().data() + i * k * n, out.data() + i * m * n, false);
  }
  return make_op(std::move(out_shape), std::move(out), {a, b},
                 [batch, m, n, k, transpose_b](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    Real* ga = pa.requires_grad ? pa.grad_buffer() : nullptr;
    Real* gb = pb.requires_grad ? pb.grad_buffer() : nullptr;
    for (std::size_t i = 0; i < batch; ++i) {
      const Real* g = self.grad.data() + i * m * n;
      const Real* ad = pa.data.data() + i * m * k;
      const Real* bd = pb.data.data() + i * k * n;
      if (ga) kernels::gemm(false, !transpose_b, m, k, n, g, bd, ga + i * m * k, true);
      if (gb) {
        if (transpose_b) {
          kernels::gemm(true, false, n, k, m, g, ad, gb + i * k * n, true);
        } else {
          kernels::gemm(true, false, k, n, m, ad, g, gb + i * k * n, true);
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Layout

Tensor reshape(const Tensor& a, Shape shape) {
  check_shape(shape);
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("cannot reshape " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  std::vector<Real> out(a.data().begin(), a.data().end());
  return make_op(std::move(shape), std::move(out), {a}, [](Node& self) {
    Real* ga = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
  });
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& order) {
  const std::size_t r = a.rank();
  std::vector<bool> used(r, false);
  bool valid = order.size() == r;
  for (auto axis : order) {
    valid = valid && axis < r && !used[axis];
    if (axis < r) used[axis] = true;
  }
  if (!valid) throw DimensionError("invalid permutation for " + shape_str(a.shape()));

  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * a.shape()[i];
  Shape out_shape(r);
  std::vector<std::size_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = a.shape()[order[i]];
    src_stride[i] = in_strides[order[i]];
  }
  // Source offset for every output element, walked with an odometer.
  std::vector<std::size_t> source(a.numel());
  std::vector<std::size_t> index(r, 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < source.size(); ++flat) {
    source[flat] = offset;
    for (std::size_t d = r; d-- > 0;) {
      if (++index[d] < out_shape[d]) {
        offset += src_stride[d];
        break;
      }
      offset -= src_stride[d] * (out_shape[d] - 1);
      index[d] = 0;
    }
  }
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[source[i]];
  return make_op(std::move(out_shape), std::move(out), {a},
                 [source = std::move(source)](Node& self) {
    Real* ga = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[source[i]] += self.grad[i];
  });
}

Tensor concat_last(const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank() || a.rank() == 0 ||
      !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
    throw DimensionError("concat shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t wa = a.shape().back();
  const std::size_t wb = b.shape().back();
  const std::size_t rows = a.numel() / wa;
  Shape out_shape = a.shape();
  out_shape.back() = wa + wb;
  std::vector<Real> out(rows * (wa + wb));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.data().data() + r * wa, wa, out.data() + r * (wa + wb));
    std::copy_n(b.data().data() + r * wb, wb, out.data() + r * (wa + wb) + wa);
  }
  return make_op(std::move(out_shape), std::move(out), {a, b}, [rows, wa, wb](Node& self) {
    if (self.parents[0]->requires_grad) {
      Real* ga = self.parents[0]->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < wa; ++j) ga[r * wa + j] += self.grad[r * (wa + wb) + j];
      }
    }
    if (self.parents[1]->requires_grad) {
      Real* gb = self.parents[1]->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < wb; ++j) gb[r * wb + j] += self.grad[r * (wa + wb) + wa + j];
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Normalizations

Tensor softmax(const Tensor& x, int axis) {
  const std::size_t extent = x.dim(axis);
  const int r = static_cast<int>(x.rank());
  const auto ax = static_cast<std::size_t>(axis < 0 ? axis + r : axis);
  std::size_t inner = 1;
  for (std::size_t i = ax + 1; i < x.rank(); ++i) inner *= x.shape()[i];
  const std::size_t outer = x.numel() / (extent * inner);

  std::vector<Real> out(x.numel());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * extent * inner + in;
      Real peak = -std::numeric_limits<Real>::infinity();
      for (std::size_t j = 0; j < extent; ++j) peak = std::max(peak, x[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < extent; ++j) {
        const double e = std::exp(static_cast<double>(x[base + j * inner]) - peak);
        out[base + j * inner] = static_cast<Real>(e);
        total += e;
      }
      for (std::size_t j = 0; j < extent; ++j) {
        out[base + j * inner] = static_cast<Real>(out[base + j * inner] / total);
      }
    }
  }
  return make_op(x.shape(), std::move(out), {x}, [outer, inner, extent](Node& self) {
    Real* gx = self.parents[0]->grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * extent * inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < extent; ++j) {
          dot += static_cast<double>(self.grad[base + j * inner]) * self.data[base + j * inner];
        }
        for (std::size_t j = 0; j < extent; ++j) {
          const std::size_t i = base + j * inner;
          gx[i] += static_cast<Real>(self.data[i] * (self.grad[i] - dot));
        }
      }
    }
  });
}

Tensor masked_softmax(const Tensor& scores, std::span<const std::uint8_t> allowed,
                      std::size_t group) {
  if (scores.rank() < 2) throw DimensionError("masked_softmax needs [..., len_q, len_k] scores");
  const std::size_t len_q = scores.dim(-2);
  const std::size_t len_k = scores.dim(-1);
  const std::size_t slices = scores.numel() / (len_q * len_k);
  if (group == 0 || slices % group != 0 || allowed.size() != (slices / group) * len_q * len_k) {
    throw DimensionError("mask of " + std::to_string(allowed.size()) + " entries does not fit scores " +
                         shape_str(scores.shape()) + " with group " + std::to_string(group));
  }
  std::vector<Real> out(scores.numel());
  std::vector<double> shifted(len_k);
  for (std::size_t s = 0; s < slices; ++s) {
    const std::uint8_t* mask = allowed.data() + (s / group) * len_q * len_k;
    for (std::size_t q = 0; q < len_q; ++q) {
      const std::size_t row = (s * len_q + q) * len_k;
      const std::uint8_t* mrow = mask + q * len_k;
      if (std::none_of(mrow, mrow + len_k, [](std::uint8_t v) { return v != 0; })) {
        throw DegenerateMaskError("query row " + std::to_string(q) + " has no attendable position");
      }
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < len_k; ++j) {
        shifted[j] = static_cast<double>(scores[row + j]) + (mrow[j] ? 0.0 : kMaskedScore);
        peak = std::max(peak, shifted[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < len_k; ++j) {
        shifted[j] = std::exp(shifted[j] - peak);
        total += shifted[j];
      }
      for (std::size_t j = 0; j < len_k; ++j) out[row + j] = static_cast<Real>(shifted[j] / total);
    }
  }
  return make_op(scores.shape(), std::move(out), {scores},
                 [len_k](Node& self) { softmax_rows_backward(self, len_k); });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Real eps) {
  if (!(eps > Real(0))) throw ParameterError("layer_norm eps must be positive");
  if (x.rank() == 0) throw DimensionError("layer_norm on a scalar");
  const std::size_t width = x.shape().back();
  if (gain.shape() != Shape{width} || bias.shape() != Shape{width}) {
    throw DimensionError("layer_norm gain/bias " + shape_str(gain.shape()) + "/" +
                         shape_str(bias.shape()) + " do not match width " + std::to_string(width));
  }
  const std::size_t rows = x.numel() / width;
  std::vector<Real> out(x.numel());
  auto normalized = std::make_shared<std::vector<Real>>(x.numel());
  auto inv_std = std::make_shared<std::vector<Real>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* xr = x.data().data() + r * width;
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += xr[j];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(width);
    const double rstd = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = static_cast<Real>(rstd);
    for (std::size_t j = 0; j < width; ++j) {
      const auto xh = static_cast<Real>((xr[j] - mu) * rstd);
      (*normalized)[r * width + j] = xh;
      out[r * width + j] = gain[j] * xh + bias[j];
    }
  }
  return make_op(x.shape(), std::move(out), {x, gain, bias},
                 [rows, width, normalized, inv_std](Node& self) {
    Node& px = *self.parents[0];
    Node& pg = *self.parents[1];
    Node& pb = *self.parents[2];
    const auto& xh = *normalized;
    if (pg.requires_grad || pb.requires_grad) {
      Real* gg = pg.requires_grad ? pg.grad_buffer() : nullptr;
      Real* gbias = pb.requires_grad ? pb.grad_buffer() : nullptr;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < width; ++j) {
          const Real g = self.grad[r * width + j];
          if (gg) gg[j] += g * xh[r * width + j];
          if (gbias) gbias[j] += g;
        }
      }
    }
    if (px.requires_grad) {
      Real* gx = px.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        double mean_d = 0.0;
        double mean_dx = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
          const double d = static_cast<double>(self.grad[r * width + j]) * pg.data[j];
          mean_d += d;
          mean_dx += d * xh[r * width + j];
        }
        mean_d /= static_cast<double>(width);
        mean_dx /= static_cast<double>(width);
        for (std::size_t j = 0; j < width; ++j) {
          const double d = static_cast<double>(self.grad[r * width + j]) * pg.data[j];
          gx[r * width + j] += static_cast<Real>((*inv_std)[r] * (d - mean_d - xh[r * width + j] * mean_dx));
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Lookup and reductions

Tensor embedding(const Tensor& table, std::span<const int> indices, const Shape& leading) {
  if (table.rank() != 2) throw DimensionError("embedding table must be 2-D, got " + shape_str(table.shape()));
  if (shape_numel(leading) != indices.size()) {
    throw DimensionError("embedding index count does not match " + shape_str(leading));
  }
  const std::size_t vocab = table.shape()[0];
  const std::size_t width = table.shape()[1];
  std::vector<Real> out(indices.size() * width);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int id = indices[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw VocabularyError("token index " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(vocab));
    }
    std::copy_n(table.data().data() + static_cast<std::size_t>(id) * width, width, out.data() + i * width);
  }
  Shape out_shape = leading;
  out_shape.push_back(width);
  std::vector<int> ids(indices.begin(), indices.end());
  return make_op(std::move(out_shape), std::move(out), {table},
                 [ids = std::move(ids), width](Node& self) {
    Real* gt = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Real* row = gt + static_cast<std::size_t>(ids[i]) * width;
      for (std::size_t j = 0; j < width; ++j) row[j] += self.grad[i * width + j];
    }
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (Real v : a.data()) total += v;
  return make_op(Shape{}, {static_cast<Real>(total)}, {a}, [](Node& self) {
    Real* ga = self.parents[0]->grad_buffer();
    const Real g = self.grad[0];
    for (std::size_t i = 0; i < self.parents[0]->data.size(); ++i) ga[i] += g;
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), Real(1) / static_cast<Real>(a.numel())); }

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets, int ignore_index,
                     Reduction reduction) {
  if (logits.rank() == 0) throw DimensionError("cross_entropy on a scalar");
  const std::size_t vocab = logits.shape().back();
  const std::size_t rows = logits.numel() / vocab;
  if (targets.size() != rows) {
    throw ContractError("cross_entropy has " + std::to_string(rows) + " logit rows but " +
                        std::to_string(targets.size()) + " targets");
  }
  std::size_t counted = 0;
  double total = 0.0;
  auto probs = std::make_shared<std::vector<Real>>(logits.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] == ignore_index) continue;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= vocab) {
      throw VocabularyError("target index " + std::to_string(targets[r]) + " outside vocabulary");
    }
    const Real* z = logits.data().data() + r * vocab;
    const double peak = *std::max_element(z, z + vocab);
    double norm = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) norm += std::exp(z[j] - peak);
    const double lse = peak + std::log(norm);
    for (std::size_t j = 0; j < vocab; ++j) (*probs)[r * vocab + j] = static_cast<Real>(std::exp(z[j] - lse));
    total += lse - z[targets[r]];
    ++counted;
  }
  if (counted == 0) throw ContractError("cross_entropy over zero non-padding targets");
  const double denom = reduction == Reduction::kMean ? static_cast<double>(counted) : 1.0;
  std::vector<int> ids(targets.begin(), targets.end());
  return make_op(Shape{}, {static_cast<Real>(total / denom)}, {logits},
                 [probs, ids = std::move(ids), vocab, ignore_index, denom](Node& self) {
    Real* gz = self.parents[0]->grad_buffer();
    const double g = self.grad[0] / denom;
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (ids[r] == ignore_index) continue;
      for (std::size_t j = 0; j < vocab; ++j) {
        const double onehot = static_cast<std::size_t>(ids[r]) == j ? 1.0 : 0.0;
        gz[r * vocab + j] += static_cast<Real>(g * ((*probs)[r * vocab + j] - onehot));
      }
    }
  });
}

Tensor mse_loss(const Tensor& predicted, const Tensor& target, std::span<const std::uint8_t> row_mask,
                Reduction reduction) {
  if (predicted.shape() != target.shape()) {
    throw ContractError("mse_loss shape mismatch " + shape_str(predicted.shape()) + " vs " +
                        shape_str(target.shape()));
  }
  const std::size_t width = predicted.rank() == 0 ? 1 : predicted.shape().back();
  const std::size_t rows = rows_of(predicted.shape());
  if (!row_mask.empty() && row_mask.size() != rows) {
    throw ContractError("mse_loss mask has " + std::to_string(row_mask.size()) + " rows, expected " +
                        std::to_string(rows));
  }
  std::size_t counted = 0;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_mask.empty() && !row_mask[r]) continue;
    ++counted;
    for (std::size_t j = 0; j < width; ++j) {
      const double d = static_cast<double>(predicted[r * width + j]) - target[r * width + j];
      total += d * d;
    }
  }
  if (counted == 0) throw ContractError("mse_loss over zero unmasked rows");
  const double denom = reduction == Reduction::kMean ? static_cast<double>(counted * width) : 1.0;
  std::vector<std::uint8_t> mask(row_mask.begin(), row_mask.end());
  return make_op(Shape{}, {static_cast<Real>(total / denom)}, {predicted, target},
                 [mask = std::move(mask), width, denom](Node& self) {
    Node& pp = *self.parents[0];
    Node& pt = *self.parents[1];
    const double g = 2.0 * self.grad[0] / denom;
    Real* gp = pp.requires_grad ? pp.grad_buffer() : nullptr;
    Real* gt = pt.requires_grad ? pt.grad_buffer() : nullptr;
    for (std::size_t i = 0; i < pp.data.size(); ++i) {
      if (!mask.empty() && !mask[i / width]) continue;
      const double d = g * (static_cast<double>(pp.data[i]) - pt.data[i]);
      if (gp) gp[i] += static_cast<Real>(d);
      if (gt) gt[i] -= static_cast<Real>(d);
    }
  });
}

}  // namespace sf
