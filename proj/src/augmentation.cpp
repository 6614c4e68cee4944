// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "signforge/errors.hpp"

namespace sf {

void AugmentationConfig::validate() const {
  if (future_horizon < 1) throw ParameterError("augment.future_horizon must be at least 1");
  if (!(noise_factor >= 0.0) || !std::isfinite(noise_factor)) {
    throw ParameterError("augment.noise_factor must be a non-negative number");
  }
}

std::string noise_source_name(NoiseSource source) {
  return source == NoiseSource::kResidual ? "residual" : "positional";
}

NoiseSource parse_noise_source(const std::string& text) {
  if (text == "residual") return NoiseSource::kResidual;
  if (text == "positional") return NoiseSource::kPositional;
  throw ConfigError("augment.noise_source must be residual or positional, got '" + text + "'");
}

void JointStatsAccumulator::add(std::span<const Real> frame) {
  if (frame.size() != sum_.size()) throw DimensionError("frame width does not match the statistics width");
  for (std::size_t c = 0; c < frame.size(); ++c) {
    const double v = frame[c];
    sum_[c] += v;
    sum_sq_[c] += v * v;
  }
  ++count_;
}

JointStats JointStatsAccumulator::finish(int epoch_index) const {
  if (count_ == 0) throw ContractError("cannot compute joint statistics without frames");
  JointStats s;
  s.epoch_index = epoch_index;
  s.mean.resize(sum_.size());
  s.stddev.resize(sum_.size());
  const double n = static_cast<double>(count_);
  for (std::size_t c = 0; c < sum_.size(); ++c) {
    const double m = sum_[c] / n;
    s.mean[c] = m;
    s.stddev[c] = std::sqrt(std::max(0.0, sum_sq_[c] / n - m * m));
  }
  return s;
}

JointStats collect_joint_stats(const std::vector<PoseSequence>& sequences, int epoch_index) {
  if (sequences.empty()) throw ContractError("cannot compute joint statistics without sequences");
  JointStatsAccumulator acc(sequences.front().width());
  for (const auto& s : sequences) {
    for (std::size_t u = 0; u < s.length(); ++u) acc.add(s.frame(u));
  }
  return acc.finish(epoch_index);
}

std::vector<Real> future_prediction_targets(const PoseSequence& seq, int horizon) {
  if (horizon < 1) throw ParameterError("future horizon must be at least 1");
  const std::size_t len = seq.length();
  if (len == 0) throw ParameterError("cannot build targets for an empty pose sequence");
  const std::size_t w = seq.width();
  const std::size_t h = static_cast<std::size_t>(horizon);
  const std::size_t row = h * (w + 1);
  std::vector<Real> out(len * row);
  for (std::size_t u = 0; u < len; ++u) {
    for (std::size_t k = 0; k < h; ++k) {
      const std::size_t frame = u + k;  // 0-based index of frame u+1+k (1-based)
      const bool past_end = frame >= len;
      const std::size_t src = past_end ? len - 1 : frame;
      Real* dst = out.data() + u * row + k * (w + 1);
      std::copy_n(seq.frames.begin() + static_cast<std::ptrdiff_t>(src * w), w, dst);
      dst[w] = past_end ? Real(1) : seq.counters[src];
    }
  }
  return out;
}

DecoderInputs just_counter_inputs(const PoseSequence& seq) {
  DecoderInputs in;
  const std::size_t len = seq.length();
  in.frames.assign(len * seq.width(), Real(0));
  in.counters.assign(len, Real(0));
  for (std::size_t u = 1; u < len; ++u) in.counters[u] = seq.counters[u - 1];
  return in;
}

void gaussian_noise_augment(std::span<Real> frames, std::size_t width, std::span<const std::uint8_t> rows,
                            const JointStats& stats, double noise_factor, Rng& rng) {
  if (stats.empty() || noise_factor == 0.0) return;
  if (stats.stddev.size() != width) throw DimensionError("noise statistics do not match the frame width");
  if (rows.size() * width != frames.size()) throw DimensionError("row mask does not match the frame count");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r]) continue;
    for (std::size_t c = 0; c < width; ++c) {
      const double sigma = noise_factor * stats.stddev[c];
      if (sigma == 0.0) continue;
      frames[r * width + c] += static_cast<Real>(sigma * rng.normal());
    }
  }
}

void gaussian_noise_augment(ProgressiveBatch& batch, const JointStats& stats, double noise_factor, Rng& rng) {
  std::vector<std::uint8_t> rows(batch.batch * batch.frames, 0);
  for (std::size_t b = 0; b < batch.batch; ++b) {
    for (std::size_t u = 1; u < batch.frames; ++u) rows[b * batch.frames + u] = batch.valid[b * batch.frames + u];
  }
  gaussian_noise_augment(batch.input_frames, batch.width, rows, stats, noise_factor, rng);
}

}  // namespace sf
