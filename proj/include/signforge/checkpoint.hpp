// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "signforge/optim.hpp"
#include "signforge/tensor.hpp"

namespace sf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_text;
  std::vector<std::string> source_vocab;
  std::vector<std::string> target_vocab;
  std::uint32_t joints = 0;
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;
  std::string rng_state;
  std::vector<NamedTensor> tensors;

  bool has_optimizer = false;
  std::uint64_t adam_step = 0;
  double adam_lr = 0.0;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.0;
  double adam_epsilon = 0.0;
  std::vector<NamedTensor> adam_first;   // named like the parameters
  std::vector<NamedTensor> adam_second;
};

// Layout: magic "SFCK", u32 version, then length-prefixed fields in the order
// of the struct, tensors as (name, rank, u64 dims, little-endian float32
// values), then a 64-bit FNV-1a checksum of everything before it and the
// trailer "KCFS".
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
// Throws LoadError on a bad magic, version mismatch, truncation, checksum
// failure or trailing bytes.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Copies parameters (and, if given, Adam moments) into a checkpoint.
void capture_parameters(Checkpoint& ckpt, const ParameterStore& store, const AdamState* adam = nullptr);
// Writes checkpoint tensors into `store`. Every parameter must be present
// with the same shape; otherwise a LoadError names the first offender.
void restore_parameters(const Checkpoint& ckpt, ParameterStore& store, AdamState* adam = nullptr);

}  // namespace sf
