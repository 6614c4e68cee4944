// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sf {

// Every failure raised by the library carries one of these categories. The
// C API maps them onto status codes and the CLI prints the category name.
enum class ErrorCategory {
  kDimension,
  kParameter,
  kContract,
  kVocabulary,
  kDegenerateMask,
  kLoad,
  kIo,
  kConfig,
};

std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error(ErrorCategory::kDimension, m) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& m) : Error(ErrorCategory::kParameter, m) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error(ErrorCategory::kContract, m) {}
};

class VocabularyError : public Error {
 public:
  explicit VocabularyError(const std::string& m) : Error(ErrorCategory::kVocabulary, m) {}
};

class DegenerateMaskError : public Error {
 public:
  explicit DegenerateMaskError(const std::string& m)
      : Error(ErrorCategory::kDegenerateMask, m) {}
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& m) : Error(ErrorCategory::kLoad, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCategory::kIo, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::kConfig, m) {}
};

}  // namespace sf
