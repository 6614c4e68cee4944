// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signforge/pose.hpp"
#include "signforge/progressive.hpp"
#include "signforge/rng.hpp"

namespace sf {

enum class NoiseSource { kResidual, kPositional };

struct AugmentationConfig {
  bool future_prediction = false;
  int future_horizon = 10;
  bool just_counter = false;
  bool gaussian_noise = false;
  double noise_factor = 5.0;
  NoiseSource noise_source = NoiseSource::kResidual;

  // Horizon actually trained: future_horizon with future prediction, else 1.
  int effective_horizon() const { return future_prediction ? future_horizon : 1; }
  void validate() const;
};

std::string noise_source_name(NoiseSource source);
NoiseSource parse_noise_source(const std::string& text);

// Per-channel population statistics over a set of frames.
struct JointStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  int epoch_index = -1;

  bool empty() const { return stddev.empty(); }
};

class JointStatsAccumulator {
 public:
  explicit JointStatsAccumulator(std::size_t width) : sum_(width, 0.0), sum_sq_(width, 0.0) {}
  void add(std::span<const Real> frame);
  std::size_t count() const { return count_; }
  // Throws ContractError when nothing was observed.
  JointStats finish(int epoch_index) const;

 private:
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
  std::size_t count_ = 0;
};

JointStats collect_joint_stats(const std::vector<PoseSequence>& sequences, int epoch_index = 0);

// [U, horizon * (3J + 1)]: row u stacks frames u+1 .. u+horizon (1-based)
// with their counters. Frames past the end repeat the final frame with
// counter 1.
std::vector<Real> future_prediction_targets(const PoseSequence& seq, int horizon);

// Decoder input counters for a sequence (start counter 0 then c_1 .. c_{U-1})
// with every joint coordinate zero.
struct DecoderInputs {
  std::vector<Real> frames;
  std::vector<Real> counters;
};
DecoderInputs just_counter_inputs(const PoseSequence& seq);

// Adds N(0, (r_n * stddev_c)^2) to channel c of every frame row whose `rows`
// entry is nonzero. Counters and targets are never touched.
void gaussian_noise_augment(std::span<Real> frames, std::size_t width, std::span<const std::uint8_t> rows,
                            const JointStats& stats, double noise_factor, Rng& rng);

// Applies the noise to the teacher-forced inputs of a batch, skipping the
// start frame and padded positions. Empty stats mean zero noise.
void gaussian_noise_augment(ProgressiveBatch& batch, const JointStats& stats, double noise_factor, Rng& rng);

}  // namespace sf
