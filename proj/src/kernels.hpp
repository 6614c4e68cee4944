// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

#include "signforge/tensor.hpp"

namespace sf::kernels {

// Row-major C[m x n] = op(A) * op(B) (+ C when accumulate), where op(A) is
// m x k and op(B) is k x n. With trans_a the storage of A is k x m; with
// trans_b the storage of B is n x k.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const Real* a, const Real* b, Real* c, bool accumulate);

// Number of kernel threads, bounded by SIGNFORGE_THREADS (default 1).
int thread_count();

// Runs body(begin, end) over a static partition of [0, n). Partition bounds
// depend only on n and the thread count, so results stay reproducible.
void parallel_for(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace sf::kernels
