// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "gradient_suite.hpp"

namespace {

void require_all(const std::vector<gradsuite::CheckResult>& results) {
  REQUIRE_FALSE(results.empty());
  for (const auto& r : results) {
    INFO(r.name << ": " << r.entries << " entries, max relative error " << r.max_relative_error);
    CHECK(r.passed());
  }
}

}  // namespace

TEST_CASE("finite differences agree with backward for every op") { require_all(gradsuite::run_op_checks()); }

TEST_CASE("finite differences agree with backward for full models") { require_all(gradsuite::run_model_checks()); }
