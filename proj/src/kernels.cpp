// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sf::kernels {

namespace {

using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

// Product of rows [row_begin, row_end) of op(A) into the same rows of C.
void gemm_rows(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
               const Real* a, const Real* b, Real* c, bool accumulate,
               std::size_t row_begin, std::size_t row_end) {
  const auto rows = static_cast<Eigen::Index>(row_end - row_begin);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ki = static_cast<Eigen::Index>(k);
  MutMap cm(c + row_begin * n, rows, ni);
  if (!accumulate) cm.setZero();
  if (trans_a) {
    ConstMap am(a, ki, static_cast<Eigen::Index>(m));
    auto a_block = am.middleCols(static_cast<Eigen::Index>(row_begin), rows).transpose();
    if (trans_b) {
      cm.noalias() += a_block * ConstMap(b, ni, ki).transpose();
    } else {
      cm.noalias() += a_block * ConstMap(b, ki, ni);
    }
  } else {
    ConstMap am(a + row_begin * k, rows, ki);
    if (trans_b) {
      cm.noalias() += am * ConstMap(b, ni, ki).transpose();
    } else {
      cm.noalias() += am * ConstMap(b, ki, ni);
    }
  }
}

}  // namespace

int thread_count() {
  static const int count = [] {
    const char* env = std::getenv("SIGNFORGE_THREADS");
    if (env == nullptr) return 1;
    const int requested = std::atoi(env);
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::clamp(requested, 1, hw);
  }();
  return count;
}

void parallel_for(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const auto threads = static_cast<std::size_t>(thread_count());
  const std::size_t chunks = std::min(threads, std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (chunks <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(chunks - 1);
  const std::size_t step = (n + chunks - 1) / chunks;
  for (std::size_t t = 1; t < chunks; ++t) {
    const std::size_t begin = t * step;
    const std::size_t end = std::min(n, begin + step);
    if (begin >= end) break;
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(n, step));
  for (auto& w : workers) w.join();
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const Real* a, const Real* b, Real* c, bool accumulate) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) std::fill(c, c + m * n, Real(0));
    return;
  }
  const std::size_t work_per_row = n * k;
  const std::size_t min_rows = std::max<std::size_t>(1, (std::size_t{1} << 18) / std::max<std::size_t>(1, work_per_row));
  parallel_for(m, min_rows, [&](std::size_t begin, std::size_t end) {
    gemm_rows(trans_a, trans_b, m, n, k, a, b, c, accumulate, begin, end);
  });
}

}  // namespace sf::kernels
