// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "signforge/pose.hpp"

namespace sf {

// Row-major [batch, length] token ids padded with Vocabulary::kPad.
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<int> ids;
  std::vector<std::uint8_t> valid;

  std::size_t real_count() const;
};

TokenBatch pad_tokens(const std::vector<std::vector<int>>& sequences);

// [batch, frames, width] frames plus [batch, frames] counters. Short
// sequences are padded by repeating their last frame; `valid` marks real
// frames.
struct PoseBatch {
  std::size_t batch = 0;
  std::size_t frames = 0;
  std::size_t width = 0;
  std::vector<Real> values;
  std::vector<Real> counters;
  std::vector<std::uint8_t> valid;

  std::size_t real_count() const;
};

PoseBatch pad_poses(const std::vector<const PoseSequence*>& sequences);

}  // namespace sf
