// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signforge/rng.hpp"
#include "signforge/tensor.hpp"

namespace sf {

// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
// For a 2-D shape [rows, cols] fan_in = rows and fan_out = cols; a 1-D shape
// uses its extent for both.
Tensor xavier_init(const Shape& shape, Rng& rng);
Tensor xavier_init(const Shape& shape, std::uint64_t seed);

enum class Init { kXavier, kZeros, kOnes };

// Ordered, named collection of the trainable leaves of a model. Names are
// dotted paths such as "decoder.layers.0.self_attn.w_q".
class ParameterStore {
 public:
  Tensor create(const std::string& name, const Shape& shape, Init init, Rng& rng);

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;
  // Null tensor when absent.
  Tensor find(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

struct AdamState {
  std::vector<std::vector<Real>> first_moment;
  std::vector<std::vector<Real>> second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
};

// One bias-corrected Adam update. Moments are allocated on first use; every
// parameter must carry a gradient.
void adam_step(std::span<Tensor> params, AdamState& state);
void adam_step(ParameterStore& store, AdamState& state);

}  // namespace sf
