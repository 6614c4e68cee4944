// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "signforge/batch.hpp"
#include "signforge/progressive.hpp"
#include "signforge/symbolic.hpp"

namespace sf {

// Continuous-input encoder: joint and counter embedding, then the encoder
// stack. Counters are recomputed from sequence length.
class PoseEncoder {
 public:
  PoseEncoder(ParameterStore& store, const std::string& name, const ModelConfig& cfg, int d_counter, int joints,
              Rng& rng);
  Tensor forward(const PoseBatch& poses) const;

 private:
  ModelConfig cfg_;
  int joints_;
  PoseEmbedding embedding_;
  EncoderStack stack_;
};

struct PoseTextBatch {
  PoseBatch source;
  TokenBatch target_in;
  std::vector<int> target_out;
};

PoseTextBatch make_pose_text_batch(const std::vector<const PoseSequence*>& poses,
                                   const std::vector<std::vector<int>>& targets);

// Back-translation model (pose to text).
class PoseToTextTransformer {
 public:
  PoseToTextTransformer(const ModelConfig& cfg, int d_counter, int joints, int target_vocab, std::uint64_t seed);
  PoseToTextTransformer(const PoseToTextTransformer&) = delete;
  PoseToTextTransformer& operator=(const PoseToTextTransformer&) = delete;

  Tensor logits(const PoseTextBatch& batch) const;
  Tensor loss(const PoseTextBatch& batch, Reduction reduction = Reduction::kMean) const;
  std::vector<std::vector<int>> translate_batch(const std::vector<const PoseSequence*>& poses,
                                                std::size_t max_len) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ModelConfig& config() const { return cfg_; }
  int joints() const { return joints_; }
  int target_vocab() const { return target_vocab_; }

 private:
  ModelConfig cfg_;
  int joints_;
  int target_vocab_;
  Rng init_rng_;
  ParameterStore store_;
  PoseEncoder encoder_;
  TextDecoder decoder_;
};

}  // namespace sf
