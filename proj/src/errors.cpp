// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/errors.hpp"

namespace sf {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kDimension: return "dimension";
    case ErrorCategory::kParameter: return "parameter";
    case ErrorCategory::kContract: return "contract";
    case ErrorCategory::kVocabulary: return "vocabulary";
    case ErrorCategory::kDegenerateMask: return "degenerate_mask";
    case ErrorCategory::kLoad: return "load";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace sf
