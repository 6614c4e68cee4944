// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/symbolic.hpp"

#include <algorithm>

#include "signforge/errors.hpp"
#include "signforge/vocabulary.hpp"

namespace sf {

namespace {

void check_length(std::size_t length, const ModelConfig& cfg) {
  if (length > static_cast<std::size_t>(cfg.max_seq_len)) {
    throw ParameterError("sequence of length " + std::to_string(length) + " exceeds model.max_seq_len " +
                         std::to_string(cfg.max_seq_len));
  }
}

}  // namespace

Tensor embed_tokens(const TokenBatch& tokens, const Tensor& weight, const Tensor& bias, bool positional) {
  Tensor e = add(embedding(weight, tokens.ids, {tokens.batch, tokens.length}), bias);
  if (positional) e = add(e, positional_table(tokens.length, weight.dim(1)));
  return e;
}

Tensor embed_tokens(std::span<const int> tokens, const Tensor& weight, const Tensor& bias, bool positional) {
  Tensor e = add(embedding(weight, tokens, {tokens.size()}), bias);
  if (positional) e = add(e, positional_table(tokens.size(), weight.dim(1)));
  return e;
}

// ---------------------------------------------------------------------------

TokenEncoder::TokenEncoder(ParameterStore& store, const std::string& name, const ModelConfig& cfg, int vocab_size,
                           Rng& rng)
    : cfg_(cfg),
      weight_(store.create(name + ".embed.weight",
                           {static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(cfg.d_model)},
                           Init::kXavier, rng)),
      bias_(store.create(name + ".embed.bias", {static_cast<std::size_t>(cfg.d_model)}, Init::kZeros, rng)),
      stack_(store, name, cfg, rng) {}

Tensor TokenEncoder::forward(const TokenBatch& source) const {
  check_length(source.length, cfg_);
  const AttentionMask mask = AttentionMask::keys(source.valid, source.batch, source.length, source.length);
  return stack_.forward(embed_tokens(source, weight_, bias_), &mask);
}

TextDecoder::TextDecoder(ParameterStore& store, const std::string& name, const ModelConfig& cfg, int vocab_size,
                         Rng& rng)
    : cfg_(cfg),
      vocab_(vocab_size),
      weight_(store.create(name + ".embed.weight",
                           {static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(cfg.d_model)},
                           Init::kXavier, rng)),
      bias_(store.create(name + ".embed.bias", {static_cast<std::size_t>(cfg.d_model)}, Init::kZeros, rng)),
      stack_(store, name, cfg, rng),
      output_(store, name + ".output", cfg.d_model, vocab_size, rng) {}

Tensor TextDecoder::forward(const TokenBatch& inputs, const Tensor& memory,
                            std::span<const std::uint8_t> memory_valid) const {
  check_length(inputs.length, cfg_);
  if (memory.rank() != 3 || memory.dim(0) != inputs.batch) {
    throw DimensionError("decoder memory " + shape_str(memory.shape()) + " does not match a batch of " +
                         std::to_string(inputs.batch));
  }
  const std::size_t len_k = memory.dim(1);
  const AttentionMask self_mask =
      subsequent_mask(inputs.length) & AttentionMask::keys(inputs.valid, inputs.batch, inputs.length, inputs.length);
  const AttentionMask cross_mask = AttentionMask::keys(memory_valid, inputs.batch, inputs.length, len_k);
  const Tensor h = stack_.forward(embed_tokens(inputs, weight_, bias_), memory, &self_mask, &cross_mask);
  return output_.forward(h);
}

std::vector<std::vector<int>> TextDecoder::greedy(const Tensor& memory, std::span<const std::uint8_t> memory_valid,
                                                  std::size_t max_len) const {
  if (max_len == 0) throw ParameterError("max_len must be at least 1");
  NoGradGuard no_grad;
  const std::size_t batch = memory.dim(0);
  const std::size_t limit = std::min(max_len, static_cast<std::size_t>(cfg_.max_seq_len) - 1);
  std::vector<std::vector<int>> prefixes(batch, std::vector<int>{Vocabulary::kBos});
  std::vector<bool> done(batch, false);
  for (std::size_t step = 0; step < limit; ++step) {
    const Tensor logits = forward(pad_tokens(prefixes), memory, memory_valid);
    const std::size_t len = prefixes.front().size();
    const auto v = static_cast<std::size_t>(vocab_);
    for (std::size_t b = 0; b < batch; ++b) {
      if (done[b]) {
        prefixes[b].push_back(Vocabulary::kPad);
        continue;
      }
      const Real* row = logits.data().data() + (b * len + (len - 1)) * v;
      const int next = static_cast<int>(std::max_element(row, row + v) - row);
      prefixes[b].push_back(next);
      if (next == Vocabulary::kEos) done[b] = true;
    }
    if (std::all_of(done.begin(), done.end(), [](bool d) { return d; })) break;
  }
  std::vector<std::vector<int>> out(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 1; i < prefixes[b].size(); ++i) {
      const int id = prefixes[b][i];
      if (id == Vocabulary::kEos || id == Vocabulary::kPad) break;
      out[b].push_back(id);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t SymbolicBatch::target_tokens() const {
  return static_cast<std::size_t>(
      std::count_if(target_out.begin(), target_out.end(), [](int id) { return id != Vocabulary::kPad; }));
}

TokenBatch sources_with_eos(const std::vector<std::vector<int>>& sources) {
  std::vector<std::vector<int>> wrapped = sources;
  for (auto& s : wrapped) s.push_back(Vocabulary::kEos);
  return pad_tokens(wrapped);
}

std::vector<std::vector<int>> targets_with_eos(const std::vector<std::vector<int>>& targets) {
  std::vector<std::vector<int>> wrapped = targets;
  for (auto& t : wrapped) t.push_back(Vocabulary::kEos);
  return wrapped;
}

SymbolicBatch make_symbolic_batch(const std::vector<std::vector<int>>& sources,
                                  const std::vector<std::vector<int>>& targets) {
  if (sources.size() != targets.size()) throw ContractError("source and target batch sizes differ");
  SymbolicBatch b;
  b.source = sources_with_eos(sources);
  std::vector<std::vector<int>> inputs;
  inputs.reserve(targets.size());
  for (const auto& t : targets) {
    std::vector<int> in{Vocabulary::kBos};
    in.insert(in.end(), t.begin(), t.end());
    inputs.push_back(std::move(in));
  }
  b.target_in = pad_tokens(inputs);
  b.target_out.assign(b.target_in.batch * b.target_in.length, Vocabulary::kPad);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::copy(targets[i].begin(), targets[i].end(),
              b.target_out.begin() + static_cast<std::ptrdiff_t>(i * b.target_in.length));
    b.target_out[i * b.target_in.length + targets[i].size()] = Vocabulary::kEos;
  }
  return b;
}

// ---------------------------------------------------------------------------

SymbolicTransformer::SymbolicTransformer(const ModelConfig& cfg, int source_vocab, int target_vocab,
                                         std::uint64_t seed)
    : cfg_(cfg),
      source_vocab_(source_vocab),
      target_vocab_(target_vocab),
      init_rng_(seed),
      encoder_(store_, "encoder", cfg, source_vocab, init_rng_),
      decoder_(store_, "decoder", cfg, target_vocab, init_rng_) {}

Tensor SymbolicTransformer::logits(const SymbolicBatch& batch) const {
  const Tensor memory = encoder_.forward(batch.source);
  return decoder_.forward(batch.target_in, memory, batch.source.valid);
}

Tensor SymbolicTransformer::loss(const SymbolicBatch& batch, Reduction reduction) const {
  return cross_entropy(logits(batch), batch.target_out, Vocabulary::kPad, reduction);
}

std::vector<int> SymbolicTransformer::translate_greedy(const std::vector<int>& source, std::size_t max_len) const {
  return translate_batch({source}, max_len).front();
}

std::vector<std::vector<int>> SymbolicTransformer::translate_batch(const std::vector<std::vector<int>>& sources,
                                                                   std::size_t max_len) const {
  NoGradGuard no_grad;
  const TokenBatch src = sources_with_eos(sources);
  const Tensor memory = encoder_.forward(src);
  return decoder_.greedy(memory, src.valid, max_len);
}

double token_accuracy(const Tensor& logits, std::span<const int> targets) {
  const std::size_t vocab = logits.shape().back();
  std::size_t counted = 0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] == Vocabulary::kPad) continue;
    const Real* row = logits.data().data() + r * vocab;
    const auto best = static_cast<int>(std::max_element(row, row + vocab) - row);
    ++counted;
    correct += best == targets[r] ? 1 : 0;
  }
  return counted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(counted);
}

}  // namespace sf
