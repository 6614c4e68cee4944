// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/progressive.hpp"

#include <algorithm>

#include "signforge/augmentation.hpp"
#include "signforge/errors.hpp"

namespace sf {

void ProgressiveConfig::validate() const {
  model.validate();
  if (joints <= 0) throw ParameterError("joint count must be positive");
  if (d_counter <= 0 || d_counter >= model.d_model) {
    throw ParameterError("d_counter must lie in [1, d_model - 1], got " + std::to_string(d_counter));
  }
  if (future_horizon < 1) throw ParameterError("future horizon must be at least 1");
}

Tensor embed_joints(const Tensor& frames, const Tensor& weight, const Tensor& bias) {
  if (frames.shape().back() != weight.dim(0)) {
    throw DimensionError("frames " + shape_str(frames.shape()) + " do not match joint embedding " +
                         shape_str(weight.shape()));
  }
  return add(matmul(frames, weight), bias);
}

Tensor counter_embed(const Tensor& joint_embedding, const Tensor& counters, const Tensor& weight,
                     const Tensor& bias) {
  if (counters.shape().back() != 1) throw DimensionError("counters must have a trailing extent of 1");
  for (Real c : counters.data()) {
    if (!(c >= Real(0) && c <= Real(1))) throw ContractError("counter value outside [0, 1]");
  }
  return concat_last(joint_embedding, add(matmul(counters, weight), bias));
}

PoseEmbedding::PoseEmbedding(ParameterStore& store, const std::string& name, int d_model, int d_counter,
                             int joints, bool just_counter, Rng& rng)
    : d_model_(d_model), d_counter_(d_counter), joints_(joints), just_counter_(just_counter) {
  if (!just_counter) joint_ = Linear(store, name + ".joint", 3 * joints, d_model - d_counter, rng);
  counter_ = Linear(store, name + ".counter", 1, d_counter, rng);
}

Tensor PoseEmbedding::forward(const Tensor& frames, const Tensor& counters) const {
  Tensor joint_block;
  if (just_counter_) {
    Shape shape = counters.shape();
    shape.back() = static_cast<std::size_t>(d_model_ - d_counter_);
    joint_block = Tensor(shape);
  } else {
    joint_block = embed_joints(frames, joint_.weight(), joint_.bias());
  }
  return counter_embed(joint_block, counters, counter_.weight(), counter_.bias());
}

// ---------------------------------------------------------------------------

ProgressiveBatch make_progressive_batch(const std::vector<std::vector<int>>& sources,
                                        const std::vector<const PoseSequence*>& poses, int horizon) {
  if (sources.size() != poses.size()) throw ContractError("source and pose batch sizes differ");
  const PoseBatch p = pad_poses(poses);
  ProgressiveBatch b;
  b.source = sources_with_eos(sources);
  b.batch = p.batch;
  b.frames = p.frames;
  b.width = p.width;
  b.target_width = static_cast<std::size_t>(horizon) * (p.width + 1);
  b.valid = p.valid;
  b.input_frames.assign(b.batch * b.frames * b.width, Real(0));
  b.input_counters.assign(b.batch * b.frames, Real(0));
  b.targets.resize(b.batch * b.frames * b.target_width);
  for (std::size_t i = 0; i < b.batch; ++i) {
    for (std::size_t u = 1; u < b.frames; ++u) {
      std::copy_n(p.values.begin() + static_cast<std::ptrdiff_t>((i * b.frames + u - 1) * b.width), b.width,
                  b.input_frames.begin() + static_cast<std::ptrdiff_t>((i * b.frames + u) * b.width));
      b.input_counters[i * b.frames + u] = p.counters[i * b.frames + u - 1];
    }
    const std::vector<Real> t = future_prediction_targets(*poses[i], horizon);
    const std::size_t len = poses[i]->length();
    for (std::size_t u = 0; u < b.frames; ++u) {
      const std::size_t src = std::min(u, len - 1);
      std::copy_n(t.begin() + static_cast<std::ptrdiff_t>(src * b.target_width), b.target_width,
                  b.targets.begin() + static_cast<std::ptrdiff_t>((i * b.frames + u) * b.target_width));
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

ProgressiveTransformer::ProgressiveTransformer(const ProgressiveConfig& cfg, int source_vocab, std::uint64_t seed)
    : cfg_((cfg.validate(), cfg)),
      source_vocab_(source_vocab),
      init_rng_(seed),
      encoder_(store_, "encoder", cfg.model, source_vocab, init_rng_),
      embedding_(store_, "decoder.embed", cfg.model.d_model, cfg.d_counter, cfg.joints, cfg.just_counter,
                 init_rng_),
      decoder_(store_, "decoder", cfg.model, init_rng_),
      output_(store_, "decoder.output", cfg.model.d_model, static_cast<int>(cfg.output_width()), init_rng_) {}

Tensor ProgressiveTransformer::encode(const TokenBatch& source) const { return encoder_.forward(source); }

Tensor ProgressiveTransformer::decode(const Tensor& memory, std::span<const std::uint8_t> memory_valid,
                                      const Tensor& frames, const Tensor& counters,
                                      std::span<const std::uint8_t> input_valid) const {
  if (frames.rank() != 3 || frames.dim(2) != cfg_.frame_width()) {
    throw DimensionError("decoder frames " + shape_str(frames.shape()) + " do not have width " +
                         std::to_string(cfg_.frame_width()));
  }
  const std::size_t batch = frames.dim(0);
  const std::size_t len = frames.dim(1);
  if (len > static_cast<std::size_t>(cfg_.model.max_seq_len)) {
    throw ParameterError("pose sequence of length " + std::to_string(len) + " exceeds model.max_seq_len " +
                         std::to_string(cfg_.model.max_seq_len));
  }
  if (memory.rank() != 3 || memory.dim(0) != batch) {
    throw DimensionError("decoder memory " + shape_str(memory.shape()) + " does not match a batch of " +
                         std::to_string(batch));
  }
  const AttentionMask self_mask = subsequent_mask(len) & AttentionMask::keys(input_valid, batch, len, len);
  const AttentionMask cross_mask = AttentionMask::keys(memory_valid, batch, len, memory.dim(1));
  const Tensor h = decoder_.forward(embedding_.forward(frames, counters), memory, &self_mask, &cross_mask);
  return output_.forward(h);
}

Tensor ProgressiveTransformer::forward(const ProgressiveBatch& batch) const {
  if (batch.width != cfg_.frame_width()) {
    throw DimensionError("batch frames have width " + std::to_string(batch.width) + ", model expects " +
                         std::to_string(cfg_.frame_width()));
  }
  const Tensor memory = encode(batch.source);
  const Tensor frames({batch.batch, batch.frames, batch.width}, batch.input_frames);
  const Tensor counters({batch.batch, batch.frames, 1}, batch.input_counters);
  return decode(memory, batch.source.valid, frames, counters, batch.valid);
}

Tensor ProgressiveTransformer::loss(const ProgressiveBatch& batch) const {
  if (batch.target_width != cfg_.output_width()) {
    throw ContractError("targets have width " + std::to_string(batch.target_width) + ", model predicts " +
                        std::to_string(cfg_.output_width()));
  }
  const Tensor target({batch.batch, batch.frames, batch.target_width}, batch.targets);
  return mse_loss(forward(batch), target, batch.valid);
}

ProgressiveOutput ProgressiveTransformer::decode_step(const Tensor& memory, std::span<const Real> history_frames,
                                                      std::span<const Real> history_counters) const {
  const std::size_t w = cfg_.frame_width();
  const std::size_t len = history_counters.size();
  if (len == 0) throw ParameterError("decode_step needs a non-empty history");
  if (history_frames.size() != len * w) throw DimensionError("history frames do not match history counters");
  NoGradGuard no_grad;
  const Tensor mem = memory.rank() == 2 ? reshape(memory, {1, memory.dim(0), memory.dim(1)}) : memory;
  const std::vector<std::uint8_t> mem_valid(mem.dim(1), 1);
  const std::vector<std::uint8_t> valid(len, 1);
  const Tensor out = decode(mem, mem_valid, Tensor({1, len, w}, {history_frames.begin(), history_frames.end()}),
                            Tensor({1, len, 1}, {history_counters.begin(), history_counters.end()}), valid);
  const Real* row = out.data().data() + (len - 1) * cfg_.output_width();
  ProgressiveOutput r;
  r.pose.assign(row, row + w);
  r.counter = std::clamp(row[w], Real(0), Real(1));
  return r;
}

std::vector<PoseSequence> ProgressiveTransformer::produce(const std::vector<std::vector<int>>& sources,
                                                          const ProductionOptions& options,
                                                          const std::vector<std::vector<Real>>* gt_counters) const {
  const bool driven = options.mode == ProductionMode::kCounterDriven;
  if (driven) {
    if (gt_counters == nullptr) throw ParameterError("counter-driven production requires ground-truth counters");
    if (gt_counters->size() != sources.size()) throw ParameterError("one counter track is needed per source");
    for (const auto& c : *gt_counters) {
      if (c.empty()) throw ParameterError("ground-truth counter track is empty");
    }
  } else if (options.max_frames == 0) {
    throw ParameterError("max_frames must be at least 1");
  }
  if (sources.empty()) return {};
  NoGradGuard no_grad;
  const TokenBatch src = sources_with_eos(sources);
  const Tensor memory = encode(src);
  const std::size_t w = cfg_.frame_width();
  const std::size_t out_w = cfg_.output_width();
  const std::size_t mem_len = memory.dim(1);
  const std::size_t d = memory.dim(2);

  std::vector<PoseSequence> result(sources.size());
  std::vector<std::vector<Real>> hist_frames(sources.size(), std::vector<Real>(w, Real(0)));
  std::vector<std::vector<Real>> hist_counters(sources.size(), std::vector<Real>{Real(0)});
  std::vector<std::size_t> active(sources.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    active[i] = i;
    result[i].joints = static_cast<std::size_t>(cfg_.joints);
  }

  Tensor act_memory = memory;
  std::vector<std::uint8_t> act_valid = src.valid;
  for (std::size_t step = 0; !active.empty(); ++step) {
    const std::size_t n = active.size();
    const std::size_t len = step + 1;
    std::vector<Real> frames(n * len * w);
    std::vector<Real> counters(n * len);
    for (std::size_t a = 0; a < n; ++a) {
      std::copy(hist_frames[active[a]].begin(), hist_frames[active[a]].end(),
                frames.begin() + static_cast<std::ptrdiff_t>(a * len * w));
      std::copy(hist_counters[active[a]].begin(), hist_counters[active[a]].end(),
                counters.begin() + static_cast<std::ptrdiff_t>(a * len));
    }
    const std::vector<std::uint8_t> valid(n * len, 1);
    const Tensor out = decode(act_memory, act_valid, Tensor({n, len, w}, std::move(frames)),
                              Tensor({n, len, 1}, std::move(counters)), valid);

    std::vector<std::size_t> still;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t i = active[a];
      const Real* row = out.data().data() + (a * len + len - 1) * out_w;
      PoseSequence& seq = result[i];
      seq.frames.insert(seq.frames.end(), row, row + w);
      const Real previous = seq.counters.empty() ? Real(0) : seq.counters.back();
      const Real predicted = std::max(previous, std::clamp(row[w], Real(0), Real(1)));
      bool finished;
      Real fed;
      if (driven) {
        fed = (*gt_counters)[i][step];
        seq.counters.push_back(fed);
        finished = seq.counters.size() == (*gt_counters)[i].size();
      } else {
        fed = predicted;
        seq.counters.push_back(predicted);
        finished = predicted >= static_cast<Real>(options.stop_threshold) || seq.counters.size() >= options.max_frames;
      }
      if (finished) continue;
      hist_frames[i].insert(hist_frames[i].end(), row, row + w);
      hist_counters[i].push_back(fed);
      still.push_back(a);
    }
    if (still.size() != n && !still.empty()) {
      std::vector<Real> mem(still.size() * mem_len * d);
      std::vector<std::uint8_t> mv(still.size() * mem_len);
      for (std::size_t k = 0; k < still.size(); ++k) {
        std::copy_n(act_memory.data().begin() + static_cast<std::ptrdiff_t>(still[k] * mem_len * d), mem_len * d,
                    mem.begin() + static_cast<std::ptrdiff_t>(k * mem_len * d));
        std::copy_n(act_valid.begin() + static_cast<std::ptrdiff_t>(still[k] * mem_len), mem_len,
                    mv.begin() + static_cast<std::ptrdiff_t>(k * mem_len));
      }
      act_memory = Tensor({still.size(), mem_len, d}, std::move(mem));
      act_valid = std::move(mv);
    }
    std::vector<std::size_t> next;
    next.reserve(still.size());
    for (std::size_t a : still) next.push_back(active[a]);
    active = std::move(next);
  }
  return result;
}

}  // namespace sf
