// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signforge/attention.hpp"
#include "signforge/batch.hpp"
#include "signforge/optim.hpp"
#include "signforge/rng.hpp"

namespace sf {

// Row t of the result is weight[x_t] + bias, i.e. the affine image of the
// one-hot vector, plus the sinusoidal encoding of t when `positional` is set.
// Output is [batch, length, d] for a batch and [length, d] for one sequence.
Tensor embed_tokens(const TokenBatch& tokens, const Tensor& weight, const Tensor& bias, bool positional = true);
Tensor embed_tokens(std::span<const int> tokens, const Tensor& weight, const Tensor& bias, bool positional = true);

// Source embedding followed by the encoder stack.
class TokenEncoder {
 public:
  TokenEncoder(ParameterStore& store, const std::string& name, const ModelConfig& cfg, int vocab_size, Rng& rng);
  // Memory [batch, length, d_model].
  Tensor forward(const TokenBatch& source) const;

 private:
  ModelConfig cfg_;
  Tensor weight_;
  Tensor bias_;
  EncoderStack stack_;
};

// Target embedding, decoder stack and vocabulary projection.
class TextDecoder {
 public:
  TextDecoder(ParameterStore& store, const std::string& name, const ModelConfig& cfg, int vocab_size, Rng& rng);

  // Teacher-forced logits [batch, length, vocab].
  Tensor forward(const TokenBatch& inputs, const Tensor& memory, std::span<const std::uint8_t> memory_valid) const;

  // Argmax decoding from BOS until EOS or max_len tokens, per batch row. Ties
  // go to the lowest index. Results exclude BOS and EOS.
  std::vector<std::vector<int>> greedy(const Tensor& memory, std::span<const std::uint8_t> memory_valid,
                                       std::size_t max_len) const;

  int vocab_size() const { return vocab_; }
  const Linear& output_layer() const { return output_; }

 private:
  ModelConfig cfg_;
  int vocab_;
  Tensor weight_;
  Tensor bias_;
  DecoderStack stack_;
  Linear output_;
};

// Padded teacher-forcing batch: sources get EOS appended, decoder inputs are
// BOS + target and decoder outputs are target + EOS.
struct SymbolicBatch {
  TokenBatch source;
  TokenBatch target_in;
  std::vector<int> target_out;  // [batch * target_in.length], PAD-filled

  std::size_t target_tokens() const;
};

SymbolicBatch make_symbolic_batch(const std::vector<std::vector<int>>& sources,
                                  const std::vector<std::vector<int>>& targets);
std::vector<std::vector<int>> targets_with_eos(const std::vector<std::vector<int>>& targets);
TokenBatch sources_with_eos(const std::vector<std::vector<int>>& sources);

// Discrete-to-discrete translation model (text to gloss).
class SymbolicTransformer {
 public:
  SymbolicTransformer(const ModelConfig& cfg, int source_vocab, int target_vocab, std::uint64_t seed);
  SymbolicTransformer(const SymbolicTransformer&) = delete;
  SymbolicTransformer& operator=(const SymbolicTransformer&) = delete;

  Tensor logits(const SymbolicBatch& batch) const;
  // Cross-entropy over non-PAD target positions.
  Tensor loss(const SymbolicBatch& batch, Reduction reduction = Reduction::kMean) const;

  // `source` excludes EOS; the output excludes BOS and EOS.
  std::vector<int> translate_greedy(const std::vector<int>& source, std::size_t max_len) const;
  std::vector<std::vector<int>> translate_batch(const std::vector<std::vector<int>>& sources,
                                                std::size_t max_len) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ModelConfig& config() const { return cfg_; }
  int source_vocab() const { return source_vocab_; }
  int target_vocab() const { return target_vocab_; }
  const TextDecoder& decoder() const { return decoder_; }

 private:
  ModelConfig cfg_;
  int source_vocab_;
  int target_vocab_;
  Rng init_rng_;
  ParameterStore store_;
  TokenEncoder encoder_;
  TextDecoder decoder_;
};

// Fraction of non-PAD target positions whose argmax logit equals the target.
double token_accuracy(const Tensor& logits, std::span<const int> targets);

}  // namespace sf
