// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "signforge/pose.hpp"
#include "signforge/rng.hpp"
#include "signforge/tensor.hpp"

namespace testutil {

inline std::vector<sf::Real> random_values(std::size_t n, sf::Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<sf::Real> v(n);
  for (auto& x : v) x = static_cast<sf::Real>(rng.uniform(lo, hi));
  return v;
}

inline sf::Tensor random_tensor(const sf::Shape& shape, sf::Rng& rng) {
  return sf::Tensor(shape, random_values(sf::shape_numel(shape), rng));
}

inline sf::PoseSequence random_pose(sf::Rng& rng, std::size_t joints, std::size_t frames) {
  return sf::make_pose_sequence(joints, random_values(frames * 3 * joints, rng));
}

inline std::vector<std::vector<int>> random_tokens(sf::Rng& rng, int vocab, const std::vector<std::size_t>& lengths) {
  std::vector<std::vector<int>> out;
  for (std::size_t len : lengths) {
    std::vector<int> s(len);
    for (auto& t : s) t = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab - 4)));
    out.push_back(std::move(s));
  }
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("signforge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
