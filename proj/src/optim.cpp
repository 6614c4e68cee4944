// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/optim.hpp"

#include <cmath>

#include "signforge/errors.hpp"

namespace sf {

Tensor xavier_init(const Shape& shape, Rng& rng) {
  if (shape.empty()) throw ParameterError("xavier_init needs at least one extent");
  const double fan_in = static_cast<double>(shape[0]);
  const double fan_out = static_cast<double>(shape.size() > 1 ? shape[1] : shape[0]);
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<Real> values(shape_numel(shape));
  for (auto& v : values) v = static_cast<Real>(rng.uniform(-bound, bound));
  return Tensor(shape, std::move(values));
}

Tensor xavier_init(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  return xavier_init(shape, rng);
}

Tensor ParameterStore::create(const std::string& name, const Shape& shape, Init init, Rng& rng) {
  if (find(name).defined()) throw ContractError("duplicate parameter name " + name);
  std::vector<Real> values;
  switch (init) {
    case Init::kXavier: {
      Tensor t = xavier_init(shape, rng);
      values.assign(t.data().begin(), t.data().end());
      break;
    }
    case Init::kZeros: values.assign(shape_numel(shape), Real(0)); break;
    case Init::kOnes: values.assign(shape_numel(shape), Real(1)); break;
  }
  Tensor p = Tensor::parameter(shape, std::move(values));
  entries_.emplace_back(name, p);
  return p;
}

std::vector<Tensor> ParameterStore::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(t);
  return out;
}

Tensor ParameterStore::find(const std::string& name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  return Tensor();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t total = 0;
  for (const auto& [n, t] : entries_) total += t.numel();
  return total;
}

void ParameterStore::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

void adam_step(std::span<Tensor> params, AdamState& state) {
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.numel(), Real(0));
      state.second_moment.emplace_back(p.numel(), Real(0));
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw ContractError("Adam state tracks " + std::to_string(state.first_moment.size()) +
                        " parameters but " + std::to_string(params.size()) + " were given");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) {
      throw ContractError("parameter " + std::to_string(i) + " " + shape_str(params[i].shape()) +
                          " has no gradient");
    }
    if (state.first_moment[i].size() != params[i].numel()) {
      throw ContractError("Adam moments are not congruent with parameter " + std::to_string(i));
    }
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_data();
    const auto grad = params[i].grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = grad[j];
      const double mj = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      const double vj = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      m[j] = static_cast<Real>(mj);
      v[j] = static_cast<Real>(vj);
      const double step = state.learning_rate * (mj / correction1) /
                          (std::sqrt(vj / correction2) + state.epsilon);
      values[j] = static_cast<Real>(values[j] - step);
    }
  }
}

void adam_step(ParameterStore& store, AdamState& state) {
  auto params = store.tensors();
  adam_step(std::span<Tensor>(params), state);
}

}  // namespace sf
