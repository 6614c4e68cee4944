// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/attention.hpp"

#include <cmath>

#include "signforge/errors.hpp"

namespace sf {

namespace {

constexpr Real kLayerNormEps = Real(1e-6);

void check_mask(const AttentionMask* mask, std::size_t slices, std::size_t len_q, std::size_t len_k) {
  if (mask == nullptr) return;
  if (mask->len_q != len_q || mask->len_k != len_k || mask->batch == 0 || slices % mask->batch != 0) {
    throw DimensionError("attention mask [" + std::to_string(mask->batch) + "x" + std::to_string(mask->len_q) +
                         "x" + std::to_string(mask->len_k) + "] does not fit " + std::to_string(slices) +
                         " slices of " + std::to_string(len_q) + "x" + std::to_string(len_k));
  }
}

Tensor with_batch(const Tensor& x) {
  if (x.rank() == 2) return reshape(x, {1, x.shape()[0], x.shape()[1]});
  if (x.rank() != 3) throw DimensionError("expected [len, d] or [batch, len, d], got " + shape_str(x.shape()));
  return x;
}

}  // namespace

void ModelConfig::validate() const {
  if (num_layers < 0) throw ParameterError("model.layers must be non-negative");
  if (num_heads <= 0 || d_model <= 0 || max_seq_len <= 0 || d_ff < 0) {
    throw ParameterError("model dimensions must be positive");
  }
  if (d_model % num_heads != 0) {
    throw ParameterError("d_model " + std::to_string(d_model) + " is not divisible by " +
                         std::to_string(num_heads) + " heads");
  }
  if (d_model % 2 != 0) throw ParameterError("d_model must be even for sinusoidal encodings");
}

// ---------------------------------------------------------------------------
// Masks and encodings

AttentionMask AttentionMask::full(std::size_t batch, std::size_t len_q, std::size_t len_k) {
  return AttentionMask{batch, len_q, len_k, std::vector<std::uint8_t>(batch * len_q * len_k, 1)};
}

AttentionMask AttentionMask::keys(std::span<const std::uint8_t> key_valid, std::size_t batch,
                                  std::size_t len_q, std::size_t len_k) {
  if (key_valid.size() != batch * len_k) throw DimensionError("key mask size does not match batch x len_k");
  AttentionMask m{batch, len_q, len_k, std::vector<std::uint8_t>(batch * len_q * len_k)};
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t q = 0; q < len_q; ++q) {
      for (std::size_t k = 0; k < len_k; ++k) {
        m.allowed[(b * len_q + q) * len_k + k] = key_valid[b * len_k + k] ? 1 : 0;
      }
    }
  }
  return m;
}

AttentionMask AttentionMask::expanded(std::size_t target_batch) const {
  if (batch == target_batch) return *this;
  if (batch != 1) throw DimensionError("only batch-1 masks can be expanded");
  AttentionMask m{target_batch, len_q, len_k, {}};
  m.allowed.reserve(target_batch * allowed.size());
  for (std::size_t b = 0; b < target_batch; ++b) m.allowed.insert(m.allowed.end(), allowed.begin(), allowed.end());
  return m;
}

AttentionMask AttentionMask::operator&(const AttentionMask& other) const {
  if (len_q != other.len_q || len_k != other.len_k) throw DimensionError("mask extents differ");
  const std::size_t target = std::max(batch, other.batch);
  AttentionMask a = expanded(target);
  const AttentionMask b = other.expanded(target);
  for (std::size_t i = 0; i < a.allowed.size(); ++i) a.allowed[i] = a.allowed[i] && b.allowed[i];
  return a;
}

AttentionMask subsequent_mask(std::size_t n) {
  AttentionMask m{1, n, n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) m.allowed[i * n + j] = 1;
  }
  return m;
}

std::vector<Real> positional_encoding(std::size_t position, std::size_t d_model) {
  if (d_model == 0 || d_model % 2 != 0) {
    throw ParameterError("positional encoding needs an even d_model, got " + std::to_string(d_model));
  }
  std::vector<Real> pe(d_model);
  for (std::size_t i = 0; i < d_model / 2; ++i) {
    const double rate = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
    const double angle = static_cast<double>(position) / rate;
    pe[2 * i] = static_cast<Real>(std::sin(angle));
    pe[2 * i + 1] = static_cast<Real>(std::cos(angle));
  }
  return pe;
}

Tensor positional_table(std::size_t length, std::size_t d_model) {
  std::vector<Real> values;
  values.reserve(length * d_model);
  for (std::size_t t = 0; t < length; ++t) {
    const auto row = positional_encoding(t, d_model);
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({length, d_model}, std::move(values));
}

// ---------------------------------------------------------------------------
// Attention

Tensor scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                    const AttentionMask* mask, Tensor* weights) {
  if (q.rank() < 2 || k.rank() != q.rank() || v.rank() != q.rank()) {
    throw DimensionError("attention inputs must share rank >= 2: " + shape_str(q.shape()) + ", " +
                         shape_str(k.shape()) + ", " + shape_str(v.shape()));
  }
  if (k.dim(-2) != v.dim(-2)) {
    throw DimensionError("keys " + shape_str(k.shape()) + " and values " + shape_str(v.shape()) +
                         " differ in length");
  }
  const bool unbatched = q.rank() == 2;
  const Tensor qb = unbatched ? reshape(q, {1, q.shape()[0], q.shape()[1]}) : q;
  const Tensor kb = unbatched ? reshape(k, {1, k.shape()[0], k.shape()[1]}) : k;
  const Tensor vb = unbatched ? reshape(v, {1, v.shape()[0], v.shape()[1]}) : v;
  const std::size_t len_q = qb.dim(-2);
  const std::size_t len_k = kb.dim(-2);
  const std::size_t slices = qb.numel() / (len_q * qb.dim(-1));
  check_mask(mask, slices, len_q, len_k);
  const AttentionMask everything = AttentionMask::full(1, len_q, len_k);
  const AttentionMask& m = mask ? *mask : everything;

  const Real inv_scale = Real(1) / static_cast<Real>(std::sqrt(static_cast<double>(qb.dim(-1))));
  const Tensor scores = scale(bmm(qb, kb, true), inv_scale);
  const Tensor attn = masked_softmax(scores, m.allowed, slices / m.batch);
  Tensor out = bmm(attn, vb);
  if (weights) *weights = unbatched ? reshape(attn, {len_q, len_k}) : attn;
  if (unbatched) out = reshape(out, {len_q, vb.dim(-1)});
  return out;
}

Tensor multi_head_attention(const Tensor& query, const Tensor& key_value, const AttentionWeights& w,
                            int num_heads, const AttentionMask* mask, Tensor* weights_out) {
  const bool unbatched = query.rank() == 2;
  const Tensor qx = with_batch(query);
  const Tensor kx = with_batch(key_value);
  const std::size_t batch = qx.shape()[0];
  const std::size_t len_q = qx.shape()[1];
  const std::size_t len_k = kx.shape()[1];
  const std::size_t d_model = qx.shape()[2];
  const auto heads = static_cast<std::size_t>(num_heads);
  if (num_heads <= 0 || d_model % heads != 0) {
    throw DimensionError("d_model " + std::to_string(d_model) + " not divisible into " +
                         std::to_string(num_heads) + " heads");
  }
  if (kx.shape()[0] != batch || kx.shape()[2] != d_model) {
    throw DimensionError("query " + shape_str(query.shape()) + " and memory " + shape_str(key_value.shape()) +
                         " are incompatible");
  }
  check_mask(mask, batch, len_q, len_k);
  const std::size_t d_k = d_model / heads;

  auto split = [&](const Tensor& x, const Tensor& proj, std::size_t len) {
    return permute(reshape(matmul(x, proj), {batch, len, heads, d_k}), {0, 2, 1, 3});
  };
  const Tensor q = split(qx, w.w_q, len_q);
  const Tensor k = split(kx, w.w_k, len_k);
  const Tensor v = split(kx, w.w_v, len_k);

  const Real inv_scale = Real(1) / static_cast<Real>(std::sqrt(static_cast<double>(d_k)));
  const Tensor scores = scale(bmm(q, k, true), inv_scale);
  const AttentionMask everything = AttentionMask::full(1, len_q, len_k);
  const AttentionMask& m = mask ? *mask : everything;
  const Tensor attn = masked_softmax(scores, m.allowed, (batch * heads) / m.batch);
  if (weights_out) *weights_out = attn;
  const Tensor context = reshape(permute(bmm(attn, v), {0, 2, 1, 3}), {batch, len_q, d_model});
  Tensor out = matmul(context, w.w_o);
  if (unbatched) out = reshape(out, {len_q, d_model});
  return out;
}

// ---------------------------------------------------------------------------
// Layers

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng, bool bias) {
  const auto i = static_cast<std::size_t>(in);
  const auto o = static_cast<std::size_t>(out);
  weight_ = store.create(name + ".weight", {i, o}, Init::kXavier, rng);
  if (bias) bias_ = store.create(name + ".bias", {o}, Init::kZeros, rng);
}

Tensor Linear::forward(const Tensor& x) const {
  Tensor y = matmul(x, weight_);
  return bias_.defined() ? add(y, bias_) : y;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, int width, Rng& rng) {
  gain_ = store.create(name + ".gain", {static_cast<std::size_t>(width)}, Init::kOnes, rng);
  bias_ = store.create(name + ".bias", {static_cast<std::size_t>(width)}, Init::kZeros, rng);
}

Tensor LayerNorm::forward(const Tensor& x) const { return layer_norm(x, gain_, bias_, kLayerNormEps); }

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name, int d_model,
                                       int num_heads, Rng& rng)
    : heads_(num_heads) {
  const auto d = static_cast<std::size_t>(d_model);
  w_.w_q = store.create(name + ".w_q", {d, d}, Init::kXavier, rng);
  w_.w_k = store.create(name + ".w_k", {d, d}, Init::kXavier, rng);
  w_.w_v = store.create(name + ".w_v", {d, d}, Init::kXavier, rng);
  w_.w_o = store.create(name + ".w_o", {d, d}, Init::kXavier, rng);
}

Tensor MultiHeadAttention::forward(const Tensor& query, const Tensor& key_value,
                                   const AttentionMask* mask) const {
  return multi_head_attention(query, key_value, w_, heads_, mask);
}

FeedForward::FeedForward(ParameterStore& store, const std::string& name, int d_model, int d_ff, Rng& rng)
    : inner_(store, name + ".inner", d_model, d_ff, rng), outer_(store, name + ".outer", d_ff, d_model, rng) {}

Tensor FeedForward::forward(const Tensor& x) const { return outer_.forward(relu(inner_.forward(x))); }

EncoderLayer::EncoderLayer(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng)
    : self_attn_(store, name + ".self_attn", cfg.d_model, cfg.num_heads, rng),
      norm1_(store, name + ".norm1", cfg.d_model, rng),
      ff_(store, name + ".ff", cfg.d_model, cfg.ff_width(), rng),
      norm2_(store, name + ".norm2", cfg.d_model, rng) {}

Tensor EncoderLayer::forward(const Tensor& x, const AttentionMask* mask) const {
  const Tensor h = norm1_.forward(add(x, self_attn_.forward(x, x, mask)));
  return norm2_.forward(add(h, ff_.forward(h)));
}

DecoderLayer::DecoderLayer(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng)
    : self_attn_(store, name + ".self_attn", cfg.d_model, cfg.num_heads, rng),
      norm1_(store, name + ".norm1", cfg.d_model, rng),
      cross_attn_(store, name + ".cross_attn", cfg.d_model, cfg.num_heads, rng),
      norm2_(store, name + ".norm2", cfg.d_model, rng),
      ff_(store, name + ".ff", cfg.d_model, cfg.ff_width(), rng),
      norm3_(store, name + ".norm3", cfg.d_model, rng) {}

Tensor DecoderLayer::forward(const Tensor& x, const Tensor& memory, const AttentionMask* self_mask,
                             const AttentionMask* cross_mask) const {
  const Tensor h1 = norm1_.forward(add(x, self_attn_.forward(x, x, self_mask)));
  const Tensor h2 = norm2_.forward(add(h1, cross_attn_.forward(h1, memory, cross_mask)));
  return norm3_.forward(add(h2, ff_.forward(h2)));
}

EncoderStack::EncoderStack(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  for (int i = 0; i < cfg.num_layers; ++i) {
    layers_.emplace_back(store, name + ".layers." + std::to_string(i), cfg, rng);
  }
}

Tensor EncoderStack::forward(const Tensor& x, const AttentionMask* mask) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = layer.forward(h, mask);
  return h;
}

DecoderStack::DecoderStack(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  for (int i = 0; i < cfg.num_layers; ++i) {
    layers_.emplace_back(store, name + ".layers." + std::to_string(i), cfg, rng);
  }
}

Tensor DecoderStack::forward(const Tensor& targets, const Tensor& memory, const AttentionMask* self_mask,
                             const AttentionMask* cross_mask) const {
  if (!memory.defined() || memory.numel() == 0) throw DimensionError("decoder memory is empty");
  Tensor h = targets;
  for (const auto& layer : layers_) h = layer.forward(h, memory, self_mask, cross_mask);
  return h;
}

}  // namespace sf
