// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/pose_to_text.hpp"

#include <algorithm>

#include "signforge/errors.hpp"
#include "signforge/vocabulary.hpp"

namespace sf {

PoseEncoder::PoseEncoder(ParameterStore& store, const std::string& name, const ModelConfig& cfg, int d_counter,
                         int joints, Rng& rng)
    : cfg_(cfg),
      joints_(joints),
      embedding_(store, name + ".embed", cfg.d_model, d_counter, joints, false, rng),
      stack_(store, name, cfg, rng) {}

Tensor PoseEncoder::forward(const PoseBatch& poses) const {
  if (poses.width != 3 * static_cast<std::size_t>(joints_)) {
    throw ParameterError("pose input has " + std::to_string(poses.width / 3) + " joints, model expects " +
                         std::to_string(joints_));
  }
  if (poses.frames > static_cast<std::size_t>(cfg_.max_seq_len)) {
    throw ParameterError("pose sequence of length " + std::to_string(poses.frames) +
                         " exceeds model.max_seq_len " + std::to_string(cfg_.max_seq_len));
  }
  const Tensor frames({poses.batch, poses.frames, poses.width}, poses.values);
  std::vector<Real> schedule(poses.batch * poses.frames);
  for (std::size_t b = 0; b < poses.batch; ++b) {
    std::size_t len = 0;
    for (std::size_t u = 0; u < poses.frames; ++u) len += poses.valid[b * poses.frames + u] ? 1 : 0;
    const std::vector<Real> c = counter_schedule(len);
    for (std::size_t u = 0; u < poses.frames; ++u) schedule[b * poses.frames + u] = c[std::min(u, len - 1)];
  }
  const Tensor counters({poses.batch, poses.frames, 1}, std::move(schedule));
  const AttentionMask mask = AttentionMask::keys(poses.valid, poses.batch, poses.frames, poses.frames);
  return stack_.forward(embedding_.forward(frames, counters), &mask);
}

PoseTextBatch make_pose_text_batch(const std::vector<const PoseSequence*>& poses,
                                   const std::vector<std::vector<int>>& targets) {
  if (poses.size() != targets.size()) throw ContractError("pose and target batch sizes differ");
  PoseTextBatch b;
  b.source = pad_poses(poses);
  const SymbolicBatch s = make_symbolic_batch(std::vector<std::vector<int>>(targets.size(), {Vocabulary::kEos}),
                                              targets);
  b.target_in = s.target_in;
  b.target_out = s.target_out;
  return b;
}

PoseToTextTransformer::PoseToTextTransformer(const ModelConfig& cfg, int d_counter, int joints, int target_vocab,
                                             std::uint64_t seed)
    : cfg_(cfg),
      joints_(joints),
      target_vocab_(target_vocab),
      init_rng_(seed),
      encoder_(store_, "encoder", cfg, d_counter, joints, init_rng_),
      decoder_(store_, "decoder", cfg, target_vocab, init_rng_) {
  if (joints <= 0) throw ParameterError("joint count must be positive");
  if (d_counter <= 0 || d_counter >= cfg.d_model) throw ParameterError("d_counter must lie in [1, d_model - 1]");
}

Tensor PoseToTextTransformer::logits(const PoseTextBatch& batch) const {
  const Tensor memory = encoder_.forward(batch.source);
  return decoder_.forward(batch.target_in, memory, batch.source.valid);
}

Tensor PoseToTextTransformer::loss(const PoseTextBatch& batch, Reduction reduction) const {
  return cross_entropy(logits(batch), batch.target_out, Vocabulary::kPad, reduction);
}

std::vector<std::vector<int>> PoseToTextTransformer::translate_batch(const std::vector<const PoseSequence*>& poses,
                                                                     std::size_t max_len) const {
  if (poses.empty()) return {};
  NoGradGuard no_grad;
  const PoseBatch src = pad_poses(poses);
  const Tensor memory = encoder_.forward(src);
  return decoder_.greedy(memory, src.valid, max_len);
}

}  // namespace sf
