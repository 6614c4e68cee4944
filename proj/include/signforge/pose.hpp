// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "signforge/tensor.hpp"

namespace sf {

// U frames of 3*J joint coordinates with one progress counter per frame.
struct PoseSequence {
  std::size_t joints = 0;
  std::vector<Real> frames;    // row-major U x 3J
  std::vector<Real> counters;  // U values in [0, 1]

  std::size_t width() const { return 3 * joints; }
  std::size_t length() const { return width() == 0 ? 0 : frames.size() / width(); }
  std::span<const Real> frame(std::size_t u) const { return {frames.data() + u * width(), width()}; }
  std::span<Real> frame(std::size_t u) { return {frames.data() + u * width(), width()}; }

  // Throws ContractError on non-finite coordinates, decreasing counters, or
  // (for ground truth) a final counter other than 1.
  void validate(bool ground_truth) const;
};

// c_u = u / U for u = 1..U.
std::vector<Real> counter_schedule(std::size_t frame_count);

// Builds a ground-truth sequence whose counters follow counter_schedule.
PoseSequence make_pose_sequence(std::size_t joints, std::vector<Real> frames);

// Text format: a `POSE3 J=<int> U=<int>` header, then U lines of 3*J
// space-separated decimals. Counters are not stored.
std::string format_pose(const PoseSequence& pose);
PoseSequence parse_pose(const std::string& text, const std::string& origin = "<memory>");
void write_pose_file(const std::string& path, const PoseSequence& pose);
PoseSequence read_pose_file(const std::string& path);

}  // namespace sf
