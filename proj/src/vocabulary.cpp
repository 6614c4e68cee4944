// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "signforge/errors.hpp"

namespace sf {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (auto r : kReserved) add(std::string(r));
}

void Vocabulary::add(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences, int min_frequency) {
  std::map<std::string, int> counts;
  for (const auto& s : sentences) {
    for (const auto& t : s) ++counts[t];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [token, count] : ranked) {
    if (count < min_frequency || v.contains(token)) continue;
    v.add(token);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.size() < kReserved.size()) throw VocabularyError("vocabulary is missing reserved tokens");
  for (std::size_t i = 0; i < kReserved.size(); ++i) {
    if (tokens[i] != kReserved[i]) {
      throw VocabularyError("vocabulary entry " + std::to_string(i) + " must be " + std::string(kReserved[i]));
    }
  }
  Vocabulary v;
  for (std::size_t i = kReserved.size(); i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw VocabularyError("duplicate vocabulary token " + tokens[i]);
    v.add(tokens[i]);
  }
  return v;
}

int Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int index) const {
  if (index < 0 || index >= size()) {
    throw VocabularyError("index " + std::to_string(index) + " outside vocabulary of size " + std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> indices) const {
  std::vector<std::string> out;
  for (int id : indices) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(token(id));
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read vocabulary " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.push_back(line);
  }
  return from_tokens(tokens);
}

}  // namespace sf
