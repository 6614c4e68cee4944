// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signforge/optim.hpp"
#include "signforge/tensor.hpp"

namespace sf {

struct ModelConfig {
  int num_layers = 2;
  int num_heads = 8;
  int d_model = 256;
  // Feed-forward inner width; 0 selects 4 * d_model.
  int d_ff = 0;
  int max_seq_len = 512;

  int ff_width() const { return d_ff > 0 ? d_ff : 4 * d_model; }
  void validate() const;
};

// Boolean mask of shape [batch, len_q, len_k]; nonzero means attention is
// allowed. A batch extent of 1 broadcasts over every batch element.
struct AttentionMask {
  std::size_t batch = 1;
  std::size_t len_q = 0;
  std::size_t len_k = 0;
  std::vector<std::uint8_t> allowed;

  bool at(std::size_t b, std::size_t q, std::size_t k) const {
    return allowed[(b * len_q + q) * len_k + k] != 0;
  }
  static AttentionMask full(std::size_t batch, std::size_t len_q, std::size_t len_k);
  // Allows every query to see the valid keys of its own batch element.
  static AttentionMask keys(std::span<const std::uint8_t> key_valid, std::size_t batch,
                            std::size_t len_q, std::size_t len_k);
  AttentionMask expanded(std::size_t target_batch) const;
  // Elementwise AND; batch-1 masks broadcast.
  AttentionMask operator&(const AttentionMask& other) const;
};

// Lower-triangular [1, n, n] mask: position i may attend to j <= i.
AttentionMask subsequent_mask(std::size_t n);

// Sinusoidal encoding: entry 2i is sin(pos / 10000^(2i/d)), entry 2i+1 the
// matching cosine. d_model must be even.
std::vector<Real> positional_encoding(std::size_t position, std::size_t d_model);
// Rows 0..length-1 of the encoding as a constant [length, d_model] tensor.
Tensor positional_table(std::size_t length, std::size_t d_model);

// softmax(Q K^T / sqrt(d_k)) V over inputs [..., len, d_k]. The mask batch
// must divide the product of leading dimensions. When `weights` is non-null
// it receives the attention matrix.
Tensor scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                    const AttentionMask* mask = nullptr, Tensor* weights = nullptr);

struct AttentionWeights {
  Tensor w_q;  // [d_model, d_model]; head i uses columns i*d_k .. (i+1)*d_k
  Tensor w_k;
  Tensor w_v;
  Tensor w_o;
};

// Multi-head attention over [len, d_model] or [batch, len, d_model] inputs.
Tensor multi_head_attention(const Tensor& query, const Tensor& key_value, const AttentionWeights& w,
                            int num_heads, const AttentionMask* mask = nullptr,
                            Tensor* weights_out = nullptr);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng, bool bias = true);
  Tensor forward(const Tensor& x) const;
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  Tensor weight_;
  Tensor bias_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, int width, Rng& rng);
  Tensor forward(const Tensor& x) const;

 private:
  Tensor gain_;
  Tensor bias_;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& name, int d_model, int num_heads, Rng& rng);
  Tensor forward(const Tensor& query, const Tensor& key_value, const AttentionMask* mask) const;
  const AttentionWeights& weights() const { return w_; }

 private:
  AttentionWeights w_;
  int heads_ = 1;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& name, int d_model, int d_ff, Rng& rng);
  Tensor forward(const Tensor& x) const;

 private:
  Linear inner_;
  Linear outer_;
};

// Post-norm sublayers: x = LN(x + Sublayer(x)).
class EncoderLayer {
 public:
  EncoderLayer(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  Tensor forward(const Tensor& x, const AttentionMask* mask) const;

 private:
  MultiHeadAttention self_attn_;
  LayerNorm norm1_;
  FeedForward ff_;
  LayerNorm norm2_;
};

class DecoderLayer {
 public:
  DecoderLayer(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  Tensor forward(const Tensor& x, const Tensor& memory, const AttentionMask* self_mask,
                 const AttentionMask* cross_mask) const;

 private:
  MultiHeadAttention self_attn_;
  LayerNorm norm1_;
  MultiHeadAttention cross_attn_;
  LayerNorm norm2_;
  FeedForward ff_;
  LayerNorm norm3_;
};

class EncoderStack {
 public:
  EncoderStack(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  Tensor forward(const Tensor& x, const AttentionMask* mask) const;

 private:
  std::vector<EncoderLayer> layers_;
};

class DecoderStack {
 public:
  DecoderStack(ParameterStore& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  // self_mask should include subsequent_mask(len_targets); cross_mask masks
  // padded memory positions.
  Tensor forward(const Tensor& targets, const Tensor& memory, const AttentionMask* self_mask,
                 const AttentionMask* cross_mask) const;

 private:
  std::vector<DecoderLayer> layers_;
};

}  // namespace sf
