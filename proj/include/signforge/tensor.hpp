// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sf {

// Storage precision. The library is compiled once in single precision for
// training and inference and once in double precision for gradient checks.
#ifdef SIGNFORGE_DOUBLE
using Real = double;
#else
using Real = float;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;
  bool requires_grad = false;
  bool leaf = true;
  // Set on leaves once backward has written into grad; cleared by zero_grad.
  bool grad_dirty = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Real* grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), Real(0));
    return grad.data();
  }
};

}  // namespace detail

// Dense row-major tensor with an optional reverse-mode gradient. Copies share
// the underlying node, so a Tensor behaves like a handle to a value in the
// autodiff graph.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor scalar(Real value);
  // Leaf tensor that participates in gradient computation.
  static Tensor parameter(Shape shape, std::vector<Real> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  // Extent along `axis`; negative values count from the back.
  std::size_t dim(int axis) const;
  std::size_t numel() const { return node_->data.size(); }

  std::span<const Real> data() const { return node_->data; }
  std::span<Real> mutable_data() { return node_->data; }
  Real item() const;
  Real operator[](std::size_t i) const { return node_->data[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value);
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const Real> grad() const { return node_->grad; }
  void zero_grad();

  // Populates gradients of every reachable leaf. The tensor must hold a
  // single element, and every reachable leaf must have been zeroed since the
  // previous backward pass.
  void backward() const;

  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

bool grad_enabled();

// Disables graph construction in the enclosing scope (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

enum class Reduction { kMean, kSum };

// Elementwise sum and difference. `b` may have the same shape as `a` or a suffix of it, in
// which case it is broadcast over the leading dimensions.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise product of equally shaped tensors.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real factor);
Tensor relu(const Tensor& a);

// [..., m, k] x [k, n] -> [..., m, n]
Tensor matmul(const Tensor& a, const Tensor& b);
// Batched product over matching leading dimensions: [..., m, k] x [..., k, n],
// or [..., m, k] x [..., n, k]^T when transpose_b is set.
Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b = false);

Tensor reshape(const Tensor& a, Shape shape);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& order);
Tensor concat_last(const Tensor& a, const Tensor& b);

Tensor softmax(const Tensor& x, int axis);
// Softmax over the last axis of scores [..., len_q, len_k]. `allowed` holds
// one byte per (group-shared batch, query, key); leading slice n of the scores
// uses mask block n / group. Disallowed positions receive an additive -1e9
// before normalization and therefore exactly zero weight.
Tensor masked_softmax(const Tensor& scores, std::span<const std::uint8_t> allowed,
                      std::size_t group);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Real eps);

// Gathers rows of table [vocab, width]; output shape is leading + [width].
Tensor embedding(const Tensor& table, std::span<const int> indices, const Shape& leading);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Negative log-softmax of `targets` over rows of logits [..., vocab]. Rows
// whose target equals ignore_index are excluded.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets, int ignore_index,
                     Reduction reduction = Reduction::kMean);

// Squared error averaged over unmasked rows and all channels of the last axis.
// An empty row_mask means every row counts.
Tensor mse_loss(const Tensor& predicted, const Tensor& target,
                std::span<const std::uint8_t> row_mask = {},
                Reduction reduction = Reduction::kMean);

}  // namespace sf
