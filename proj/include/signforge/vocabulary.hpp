// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sf {

// Whitespace tokenization without case folding.
std::vector<std::string> tokenize(std::string_view line);
std::string join_tokens(const std::vector<std::string>& tokens);

// Bijection between tokens and indices. Indices 0..3 are reserved.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr std::array<std::string_view, 4> kReserved = {"<pad>", "<bos>", "<eos>", "<unk>"};

  Vocabulary();

  // Tokens with frequency >= min_frequency, most frequent first, ties broken
  // lexicographically. Corpus occurrences of reserved strings are skipped.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sentences, int min_frequency = 1);
  // Full token list in index order; must start with the reserved tokens.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  // UNK for unknown tokens.
  int index(const std::string& token) const;
  const std::string& token(int index) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  // Drops reserved symbols and stops at the first EOS.
  std::vector<std::string> decode(std::span<const int> indices) const;

  // One token per line in index order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace sf
