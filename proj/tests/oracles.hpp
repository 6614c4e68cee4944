// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slow, independent reference implementations used to cross-check the
// library's metrics.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "signforge/pose.hpp"
#include "signforge/rng.hpp"

namespace oracle {

using Tokens = std::vector<std::string>;

inline double euclidean(const sf::PoseSequence& a, std::size_t i, const sf::PoseSequence& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.width(); ++c) {
    const double d = static_cast<double>(a.frames[i * a.width() + c]) - static_cast<double>(b.frames[j * b.width() + c]);
    s += d * d;
  }
  return std::sqrt(s);
}

// Minimum cost over every monotone path, found by exhaustive enumeration.
inline void enumerate_paths(const sf::PoseSequence& a, const sf::PoseSequence& b, std::size_t i, std::size_t j,
                            double cost, double& best, std::size_t& paths) {
  cost = cost + euclidean(a, i, b, j);
  if (i + 1 == a.length() && j + 1 == b.length()) {
    best = std::min(best, cost);
    ++paths;
    return;
  }
  if (i + 1 < a.length() && j + 1 < b.length()) enumerate_paths(a, b, i + 1, j + 1, cost, best, paths);
  if (i + 1 < a.length()) enumerate_paths(a, b, i + 1, j, cost, best, paths);
  if (j + 1 < b.length()) enumerate_paths(a, b, i, j + 1, cost, best, paths);
}

inline double brute_force_dtw(const sf::PoseSequence& a, const sf::PoseSequence& b, std::size_t* path_count = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t paths = 0;
  enumerate_paths(a, b, 0, 0, 0.0, best, paths);
  if (path_count) *path_count = paths;
  return best;
}

inline bool same_gram(const Tokens& x, std::size_t i, const Tokens& y, std::size_t j, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (x[i + k] != y[j + k]) return false;
  }
  return true;
}

inline std::size_t occurrences(const Tokens& haystack, const Tokens& x, std::size_t i, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t j = 0; j + n <= haystack.size(); ++j) count += same_gram(x, i, haystack, j, n) ? 1 : 0;
  return count;
}

// Corpus BLEU-1..max_n (0-100) by direct n-gram scanning.
inline std::vector<double> naive_bleu(const std::vector<Tokens>& cands, const std::vector<Tokens>& refs, int max_n) {
  std::vector<double> scores;
  double c_len = 0.0, r_len = 0.0;
  for (std::size_t s = 0; s < cands.size(); ++s) {
    c_len += static_cast<double>(cands[s].size());
    r_len += static_cast<double>(refs[s].size());
  }
  double bp = 0.0;
  if (c_len > r_len) bp = 1.0;
  else if (c_len > 0.0) bp = std::exp(1.0 - r_len / c_len);
  double log_precision_sum = 0.0;
  bool dead = bp == 0.0;
  for (int order = 1; order <= max_n; ++order) {
    const auto n = static_cast<std::size_t>(order);
    double hits = 0.0, grams = 0.0;
    for (std::size_t s = 0; s < cands.size(); ++s) {
      const Tokens& c = cands[s];
      for (std::size_t i = 0; i + n <= c.size(); ++i) {
        grams += 1.0;
        bool first = true;
        for (std::size_t k = 0; k < i; ++k) first = first && !same_gram(c, k, c, i, n);
        if (!first) continue;
        const std::size_t in_c = occurrences(c, c, i, n);
        const std::size_t in_r = occurrences(refs[s], c, i, n);
        hits += static_cast<double>(in_c < in_r ? in_c : in_r);
      }
    }
    if (hits == 0.0) dead = true;
    if (!dead) log_precision_sum += std::log(hits / grams);
    scores.push_back(dead ? 0.0 : 100.0 * bp * std::exp(log_precision_sum / order));
  }
  return scores;
}

// Longest common subsequence by trying every subsequence of the candidate.
inline std::size_t brute_lcs(const Tokens& c, const Tokens& r) {
  std::size_t best = 0;
  const std::size_t subsets = std::size_t{1} << c.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::size_t len = 0, pos = 0;
    bool ok = true;
    for (std::size_t i = 0; i < c.size() && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      while (pos < r.size() && r[pos] != c[i]) ++pos;
      if (pos == r.size()) ok = false;
      else {
        ++pos;
        ++len;
      }
    }
    if (ok && len > best) best = len;
  }
  return best;
}

inline double naive_rouge_l(const Tokens& c, const Tokens& r) {
  if (c.empty() || r.empty()) return 0.0;
  const double lcs = static_cast<double>(brute_lcs(c, r));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(c.size());
  const double rec = lcs / static_cast<double>(r.size());
  return 2.0 * p * rec / (p + rec);
}

inline Tokens random_sentence(sf::Rng& rng, std::size_t min_len, std::size_t max_len, int vocab) {
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  Tokens t;
  for (std::size_t i = 0; i < len; ++i) t.push_back("t" + std::to_string(rng.below(static_cast<std::uint64_t>(vocab))));
  return t;
}

}  // namespace oracle
