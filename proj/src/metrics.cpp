// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "signforge/errors.hpp"

namespace sf {

double frame_distance(std::span<const Real> a, std::span<const Real> b) {
  if (a.size() != b.size()) throw DimensionError("frames differ in width");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

AlignmentResult dtw_align(const PoseSequence& a, const PoseSequence& b) {
  const std::size_t n = a.length();
  const std::size_t m = b.length();
  if (n == 0 || m == 0) throw ParameterError("DTW needs two non-empty sequences");
  if (a.width() != b.width()) throw DimensionError("DTW sequences differ in joint count");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double best = 0.0;
      if (i > 0 || j > 0) {
        best = kInf;
        if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
        if (i > 0) best = std::min(best, at(i - 1, j));
        if (j > 0) best = std::min(best, at(i, j - 1));
      }
      at(i, j) = best + frame_distance(a.frame(i), b.frame(j));
    }
  }

  AlignmentResult r;
  r.total_cost = at(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  r.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    r.path.emplace_back(i, j);
  }
  std::reverse(r.path.begin(), r.path.end());
  r.normalized_cost = r.total_cost / static_cast<double>(r.path.size());
  return r;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

void check_corpus(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references) {
  if (candidates.empty()) throw ParameterError("cannot score an empty corpus");
  if (candidates.size() != references.size()) {
    throw ParameterError("corpus has " + std::to_string(candidates.size()) + " candidates but " +
                         std::to_string(references.size()) + " references");
  }
}

}  // namespace

std::vector<double> corpus_bleu(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references,
                                int max_n) {
  check_corpus(candidates, references);
  if (max_n < 1) throw ParameterError("BLEU order must be at least 1");
  const auto orders = static_cast<std::size_t>(max_n);
  std::vector<double> matched(orders, 0.0);
  std::vector<double> total(orders, 0.0);
  double cand_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    if (references[s].empty()) throw ParameterError("reference " + std::to_string(s) + " is empty");
    cand_len += static_cast<double>(candidates[s].size());
    ref_len += static_cast<double>(references[s].size());
    for (std::size_t n = 1; n <= orders; ++n) {
      const NgramCounts c = count_ngrams(candidates[s], n);
      const NgramCounts r = count_ngrams(references[s], n);
      for (const auto& [gram, count] : c) {
        const auto it = r.find(gram);
        matched[n - 1] += static_cast<double>(it == r.end() ? 0 : std::min(count, it->second));
        total[n - 1] += static_cast<double>(count);
      }
    }
  }
  const double bp = cand_len == 0.0 ? 0.0 : (cand_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len));
  std::vector<double> scores(orders, 0.0);
  double log_sum = 0.0;
  bool zero = bp == 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    if (matched[n - 1] == 0.0) zero = true;
    if (!zero) log_sum += std::log(matched[n - 1] / total[n - 1]);
    scores[n - 1] = zero ? 0.0 : 100.0 * bp * std::exp(log_sum / static_cast<double>(n));
  }
  return scores;
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const std::size_t n = candidate.size();
  const std::size_t m = reference.size();
  std::vector<std::size_t> prev(m + 1, 0);
  std::vector<std::size_t> cur(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[m]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(n);
  const double r = lcs / static_cast<double>(m);
  return 2.0 * p * r / (p + r);
}

double corpus_rouge_l(const std::vector<TokenSeq>& candidates, const std::vector<TokenSeq>& references) {
  check_corpus(candidates, references);
  double sum = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) sum += rouge_l(candidates[s], references[s]);
  return sum / static_cast<double>(candidates.size());
}

EvaluationReport score_translations(const std::vector<TokenSeq>& candidates,
                                    const std::vector<TokenSeq>& references) {
  EvaluationReport r;
  const std::vector<double> b = corpus_bleu(candidates, references, 4);
  std::copy(b.begin(), b.end(), r.bleu.begin());
  r.rouge_l = 100.0 * corpus_rouge_l(candidates, references);
  return r;
}

std::string format_report(const EvaluationReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "bleu1=%.4f bleu2=%.4f bleu3=%.4f bleu4=%.4f rougeL=%.4f dtw_mean=%.6f",
                report.bleu[0], report.bleu[1], report.bleu[2], report.bleu[3], report.rouge_l, report.dtw_mean);
  return buf;
}

}  // namespace sf
