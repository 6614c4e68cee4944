// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signforge/attention.hpp"
#include "signforge/batch.hpp"
#include "signforge/pose.hpp"
#include "signforge/symbolic.hpp"

namespace sf {

struct ProgressiveConfig {
  ModelConfig model;
  int joints = 0;
  // Width of the counter projection inside the d_model input embedding.
  int d_counter = 8;
  // Frames predicted per step; 1 is plain next-frame prediction.
  int future_horizon = 1;
  // Decoder inputs carry counters only; the joint block is zero.
  bool just_counter = false;

  std::size_t frame_width() const { return 3 * static_cast<std::size_t>(joints); }
  std::size_t output_width() const {
    return static_cast<std::size_t>(future_horizon) * (frame_width() + 1);
  }
  void validate() const;
};

// W^y y + b^y over frames [..., 3J].
Tensor embed_joints(const Tensor& frames, const Tensor& weight, const Tensor& bias);
// [j, W^c c + b^c] for counters [..., 1] in [0, 1].
Tensor counter_embed(const Tensor& joint_embedding, const Tensor& counters, const Tensor& weight,
                     const Tensor& bias);

// Joint and counter embedding of a continuous input stream.
class PoseEmbedding {
 public:
  PoseEmbedding(ParameterStore& store, const std::string& name, int d_model, int d_counter, int joints,
                bool just_counter, Rng& rng);
  // frames [B, U, 3J], counters [B, U, 1] -> [B, U, d_model]
  Tensor forward(const Tensor& frames, const Tensor& counters) const;

 private:
  int d_model_;
  int d_counter_;
  int joints_;
  bool just_counter_;
  Linear joint_;
  Linear counter_;
};

// Teacher-forcing batch. Position 0 of the decoder input is the start frame
// (zero pose, counter 0); position u > 0 holds ground-truth frame u. Targets
// at position u stack frames u+1 .. u+horizon with their counters.
struct ProgressiveBatch {
  TokenBatch source;
  std::size_t batch = 0;
  std::size_t frames = 0;
  std::size_t width = 0;
  std::size_t target_width = 0;
  std::vector<Real> input_frames;    // [batch, frames, width]
  std::vector<Real> input_counters;  // [batch, frames]
  std::vector<Real> targets;         // [batch, frames, target_width]
  std::vector<std::uint8_t> valid;   // [batch, frames]
};

ProgressiveBatch make_progressive_batch(const std::vector<std::vector<int>>& sources,
                                        const std::vector<const PoseSequence*>& poses, int horizon);

struct ProgressiveOutput {
  std::vector<Real> pose;  // 3J
  Real counter = 0;        // clamped to [0, 1]
};

enum class ProductionMode { kFreeRunning, kCounterDriven };

struct ProductionOptions {
  ProductionMode mode = ProductionMode::kFreeRunning;
  std::size_t max_frames = 200;
  double stop_threshold = 0.98;
};

// Discrete-to-continuous production model (gloss or text to pose).
class ProgressiveTransformer {
 public:
  ProgressiveTransformer(const ProgressiveConfig& cfg, int source_vocab, std::uint64_t seed);
  ProgressiveTransformer(const ProgressiveTransformer&) = delete;
  ProgressiveTransformer& operator=(const ProgressiveTransformer&) = delete;

  Tensor encode(const TokenBatch& source) const;
  // Decoder readout [B, U, output_width] for inputs frames [B, U, 3J] and
  // counters [B, U, 1]; rows of `input_valid` mark real positions.
  Tensor decode(const Tensor& memory, std::span<const std::uint8_t> memory_valid, const Tensor& frames,
                const Tensor& counters, std::span<const std::uint8_t> input_valid) const;
  Tensor forward(const ProgressiveBatch& batch) const;
  // MSE over real positions, counter channels included.
  Tensor loss(const ProgressiveBatch& batch) const;

  // Next frame for a single history of frames [u, 3J] and counters [u].
  ProgressiveOutput decode_step(const Tensor& memory, std::span<const Real> history_frames,
                                std::span<const Real> history_counters) const;

  // Auto-regressive production from the start frame. Counter-driven mode
  // feeds `gt_counters[i]` back as input and emits exactly that many frames.
  std::vector<PoseSequence> produce(const std::vector<std::vector<int>>& sources, const ProductionOptions& options,
                                    const std::vector<std::vector<Real>>* gt_counters = nullptr) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ProgressiveConfig& config() const { return cfg_; }
  int source_vocab() const { return source_vocab_; }

 private:
  ProgressiveConfig cfg_;
  int source_vocab_;
  Rng init_rng_;
  ParameterStore store_;
  TokenEncoder encoder_;
  PoseEmbedding embedding_;
  DecoderStack decoder_;
  Linear output_;
};

}  // namespace sf
