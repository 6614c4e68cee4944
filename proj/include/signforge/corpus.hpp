// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signforge/metrics.hpp"
#include "signforge/pose.hpp"
#include "signforge/rng.hpp"

namespace sf {

struct ParallelSample {
  std::string id;
  TokenSeq text;
  std::optional<TokenSeq> gloss;
  PoseSequence pose;
};

// Reads `<split>.ids`, `<split>.text`, the optional `<split>.gloss` and
// `pose/<id>.pose3` from `dir`.
std::vector<ParallelSample> load_split(const std::string& dir, const std::string& split);
// Writes the same layout. Gloss is written only if every sample has one.
void write_split(const std::string& dir, const std::string& split, const std::vector<ParallelSample>& samples);

// Joint roles used for skeleton normalization (0-based joint indices).
struct RigDescription {
  std::size_t joints = 0;
  std::size_t root = 0;
  std::size_t shoulder_l = 1;
  std::size_t shoulder_r = 2;
};

RigDescription read_rig(const std::string& path);
void write_rig(const std::string& path, const RigDescription& rig);

struct NormalizationParams {
  std::vector<Real> root_offsets;  // per frame, x y z
  double scale = 1.0;
};

// Moves the root joint to the origin in every frame and scales so the mean
// shoulder distance is 1. Throws ContractError for a zero shoulder distance.
PoseSequence normalize_skeleton(const PoseSequence& pose, const RigDescription& rig,
                                NormalizationParams* params = nullptr);
PoseSequence denormalize_skeleton(const PoseSequence& pose, const RigDescription& rig,
                                  const NormalizationParams& params);

struct ToyCorpusConfig {
  int vocab_size = 20;
  int train = 500;
  int dev = 50;
  int test = 50;
  int min_tokens = 4;
  int max_tokens = 6;
  // Frames per token primitive.
  int min_frames = 3;
  int max_frames = 5;
  int joints = 5;
  // Overlapping frames blended between neighbouring primitives.
  int crossfade = 1;
  std::uint64_t seed = 1;
  // Gloss is the reversed text unless this is set.
  bool identity_gloss = false;

  void validate() const;
};

struct ToyCorpus {
  RigDescription rig;
  std::vector<ParallelSample> train;
  std::vector<ParallelSample> dev;
  std::vector<ParallelSample> test;
};

// Every token maps to a fixed sinusoidal motion primitive; a sentence's pose
// concatenates the primitives of its glosses with a linear cross-fade.
// Sentences are unique across all splits.
ToyCorpus make_toy_corpus(const ToyCorpusConfig& cfg);
void synth_toy_corpus(const ToyCorpusConfig& cfg, const std::string& out_dir);

// Index batches of at most batch_size samples with similar lengths: indices
// are stably sorted by length and chunked. When `rng` is given, samples are
// shuffled before sorting (so equal-length samples mix) and so is the batch
// order.
std::vector<std::vector<std::size_t>> batchify(const std::vector<std::size_t>& lengths, std::size_t batch_size,
                                               Rng* rng = nullptr);

}  // namespace sf
