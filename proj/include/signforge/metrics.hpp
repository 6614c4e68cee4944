// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signforge/pose.hpp"

namespace sf {

struct AlignmentResult {
  // 0-based (i, j) frame pairs from (0, 0) to (U_a - 1, U_b - 1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
  double total_cost = 0.0;
  // total_cost / path.size()
  double normalized_cost = 0.0;
};

// Euclidean distance between two frames, accumulated in double precision.
double frame_distance(std::span<const Real> a, std::span<const Real> b);

// Dynamic time warping with steps (1,0), (0,1), (1,1) and no window. The
// backtrack prefers the diagonal, then (i-1, j), then (i, j-1) on ties.
AlignmentResult dtw_align(const PoseSequence& a, const PoseSequence& b);

using TokenSeq = std::vector<std::string>;

// Corpus BLEU-1 .. BLEU-max_n on a 0-100 scale: clipped n-gram precision,
// uniform geometric mean, brevity penalty exp(1 - r/c) when c <= r. No
// smoothing, so an order with no matches scores 0.
std::vector<double> corpus_bleu(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references,
                                int max_n = 4);

// LCS-based F1 in [0, 1]; an empty candidate scores 0.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);
// Mean sentence-level ROUGE-L F1.
double corpus_rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references);

struct EvaluationReport {
  std::array<double, 4> bleu{};
  double rouge_l = 0.0;   // 0-100
  double dtw_mean = 0.0;  // mean normalized DTW cost
};

EvaluationReport score_translations(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references);

// "bleu1=.. bleu2=.. bleu3=.. bleu4=.. rougeL=.. dtw_mean=.."
std::string format_report(const EvaluationReport& report);

}  // namespace sf
