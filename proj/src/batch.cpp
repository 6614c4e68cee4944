// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/batch.hpp"

#include <algorithm>

#include "signforge/errors.hpp"
#include "signforge/vocabulary.hpp"

namespace sf {

std::size_t TokenBatch::real_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

std::size_t PoseBatch::real_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

TokenBatch pad_tokens(const std::vector<std::vector<int>>& sequences) {
  TokenBatch b;
  b.batch = sequences.size();
  for (const auto& s : sequences) b.length = std::max(b.length, s.size());
  if (b.batch == 0 || b.length == 0) throw ParameterError("cannot batch empty token sequences");
  b.ids.assign(b.batch * b.length, Vocabulary::kPad);
  b.valid.assign(b.batch * b.length, 0);
  for (std::size_t i = 0; i < b.batch; ++i) {
    if (sequences[i].empty()) throw ParameterError("token sequence " + std::to_string(i) + " is empty");
    std::copy(sequences[i].begin(), sequences[i].end(), b.ids.begin() + static_cast<std::ptrdiff_t>(i * b.length));
    std::fill_n(b.valid.begin() + static_cast<std::ptrdiff_t>(i * b.length), sequences[i].size(), 1);
  }
  return b;
}

PoseBatch pad_poses(const std::vector<const PoseSequence*>& sequences) {
  PoseBatch b;
  b.batch = sequences.size();
  if (b.batch == 0) throw ParameterError("cannot batch zero pose sequences");
  b.width = sequences.front()->width();
  for (const auto* s : sequences) {
    if (s->width() != b.width) throw DimensionError("pose sequences in a batch disagree on joint count");
    if (s->length() == 0) throw ParameterError("cannot batch an empty pose sequence");
    b.frames = std::max(b.frames, s->length());
  }
  b.values.resize(b.batch * b.frames * b.width);
  b.counters.resize(b.batch * b.frames);
  b.valid.assign(b.batch * b.frames, 0);
  for (std::size_t i = 0; i < b.batch; ++i) {
    const PoseSequence& s = *sequences[i];
    for (std::size_t u = 0; u < b.frames; ++u) {
      const std::size_t src = std::min(u, s.length() - 1);
      std::copy_n(s.frames.begin() + static_cast<std::ptrdiff_t>(src * b.width), b.width,
                  b.values.begin() + static_cast<std::ptrdiff_t>((i * b.frames + u) * b.width));
      b.counters[i * b.frames + u] = s.counters[src];
      b.valid[i * b.frames + u] = u < s.length() ? 1 : 0;
    }
  }
  return b;
}

}  // namespace sf
