// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "signforge/attention.hpp"
#include "signforge/augmentation.hpp"
#include "signforge/corpus.hpp"
#include "signforge/progressive.hpp"

namespace sf {

enum class Task { kTextToGloss, kGlossToPose, kTextToPose, kPoseToText };

std::string task_name(Task task);  // t2g, g2p, t2p, p2t
Task parse_task(const std::string& text);
bool is_production_task(Task task);

std::string mode_name(ProductionMode mode);  // free, counter-driven
ProductionMode parse_mode(const std::string& text);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 100;
  int patience = 10;
  int eval_every = 1;
  std::uint64_t seed = 1;
};

struct EvalConfig {
  // Pose-to-text checkpoint used for back-translation during model selection.
  std::string backtranslation;
  ProductionMode mode = ProductionMode::kCounterDriven;
  double stop_threshold = 0.98;
  int max_frames = 0;  // 0: twice the longest training sequence
  int max_tokens = 0;  // 0: twice the longest training target
};

// Flat key=value run description. Blank lines and lines starting with '#'
// are ignored; unknown keys are a ConfigError.
struct RunConfig {
  Task task = Task::kTextToPose;
  std::string data_dir;
  bool normalize = false;
  ModelConfig model;
  int d_counter = 8;
  TrainConfig train;
  EvalConfig eval;
  AugmentationConfig augment;
  ToyCorpusConfig toy;

  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);
  void set(const std::string& key, const std::string& value);
  // Canonical text listing every key; parse(to_text()) reproduces the config.
  std::string to_text() const;
  void validate() const;

  ProgressiveConfig progressive(int joints) const;
};

}  // namespace sf
