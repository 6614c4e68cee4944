// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "signforge/augmentation.hpp"
#include "signforge/errors.hpp"
#include "test_util.hpp"

using sf::Real;
using sf::Tensor;

TEST_CASE("future prediction with horizon one equals next-frame targets") {
  sf::Rng rng(1);
  const sf::PoseSequence seq = testutil::random_pose(rng, 2, 5);
  const auto t = sf::future_prediction_targets(seq, 1);
  const auto b = sf::make_progressive_batch({{4}}, {&seq}, 1);
  CHECK(t.size() == 5 * 7);
  for (std::size_t u = 0; u < 5; ++u) {
    for (std::size_t c = 0; c < 6; ++c) CHECK(t[u * 7 + c] == seq.frames[u * 6 + c]);
    CHECK(t[u * 7 + 6] == seq.counters[u]);
  }
  CHECK(std::vector<Real>(b.targets.begin(), b.targets.end()) == t);
}

TEST_CASE("future prediction pads with the final frame") {
  const sf::PoseSequence seq = sf::make_pose_sequence(1, {1, 1, 1, 2, 2, 2, 3, 3, 3});
  const auto t = sf::future_prediction_targets(seq, 10);
  const std::size_t row = 10 * 4;
  CHECK(t.size() == 3 * row);
  // Row 1 is predicted from frame 1: frames 2, 3, then eight copies of frame 3.
  const Real* r = t.data() + row;
  CHECK(r[0] == 2);
  CHECK(r[3] == Real(2.0 / 3.0));
  for (std::size_t k = 1; k < 10; ++k) {
    CHECK(r[k * 4] == 3);
    CHECK(r[k * 4 + 3] == 1);
  }
  CHECK_THROWS_AS(sf::future_prediction_targets(seq, 0), sf::ParameterError);
}

TEST_CASE("future prediction widens the readout") {
  sf::ProgressiveConfig cfg{{1, 2, 8, 16, 32}, 3, 4, 10, false};
  CHECK(cfg.output_width() == 10 * 10);
  sf::ProgressiveTransformer model(cfg, 8, 1);
  sf::Rng rng(2);
  const sf::PoseSequence seq = testutil::random_pose(rng, 3, 4);
  const auto batch = sf::make_progressive_batch({{4, 5}}, {&seq}, 10);
  CHECK(batch.target_width == 100);
  CHECK(model.forward(batch).shape() == sf::Shape{1, 4, 100});
  sf::ProductionOptions opts;
  opts.max_frames = 3;
  CHECK(model.produce({{4, 5}}, opts)[0].width() == 9);
}

TEST_CASE("just counter inputs erase joints and keep counters") {
  sf::Rng rng(3);
  const sf::PoseSequence a = testutil::random_pose(rng, 2, 4), b = testutil::random_pose(rng, 2, 4);
  const auto ia = sf::just_counter_inputs(a), ib = sf::just_counter_inputs(b);
  CHECK(ia.frames == ib.frames);
  CHECK(ia.counters == ib.counters);
  for (Real v : ia.frames) CHECK(v == 0);
  const auto batch = sf::make_progressive_batch({{4}}, {&a}, 1);
  CHECK(std::vector<Real>(batch.input_counters.begin(), batch.input_counters.end()) == ia.counters);
}

TEST_CASE("just counter embedding sees identical inputs at training and inference") {
  sf::ParameterStore store;
  sf::Rng rng(4);
  sf::PoseEmbedding jc(store, "e", 16, 4, 2, true, rng);
  CHECK_FALSE(store.find("e.joint.weight").defined());
  const sf::PoseSequence a = testutil::random_pose(rng, 2, 5);
  const auto batch = sf::make_progressive_batch({{4}}, {&a}, 1);
  const auto inputs = sf::just_counter_inputs(a);
  const Tensor counters({1, 5, 1}, batch.input_counters);
  const Tensor trained = jc.forward(Tensor({1, 5, 6}, batch.input_frames), counters);
  const Tensor produced = jc.forward(Tensor({1, 5, 6}, testutil::random_values(30, rng)), counters);
  const Tensor erased = jc.forward(Tensor({1, 5, 6}, inputs.frames), Tensor({1, 5, 1}, inputs.counters));
  for (std::size_t i = 0; i < trained.numel(); ++i) {
    CHECK(trained[i] == produced[i]);
    CHECK(trained[i] == erased[i]);
  }
}

TEST_CASE("joint statistics") {
  const sf::PoseSequence constant = sf::make_pose_sequence(1, {2, 3, 4, 2, 3, 4, 2, 3, 4});
  const auto s = sf::collect_joint_stats({constant});
  for (double v : s.stddev) CHECK(v == 0);
  CHECK(s.mean == std::vector<double>{2, 3, 4});

  const sf::PoseSequence two = sf::make_pose_sequence(1, {0, 0, 0, 2, 2, 2});
  const auto t = sf::collect_joint_stats({two});
  for (double v : t.stddev) CHECK(v == doctest::Approx(1.0));

  sf::Rng rng(5);
  const sf::PoseSequence r = testutil::random_pose(rng, 2, 7);
  const auto once = sf::collect_joint_stats({r});
  const auto twice = sf::collect_joint_stats({r, r});
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(once.mean[c] == doctest::Approx(twice.mean[c]).epsilon(1e-12));
    CHECK(once.stddev[c] == doctest::Approx(twice.stddev[c]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sf::collect_joint_stats({}), sf::ContractError);
  CHECK_THROWS_AS(sf::JointStatsAccumulator(3).finish(0), sf::ContractError);
}

TEST_CASE("gaussian noise examples") {
  sf::Rng rng(6);
  const sf::PoseSequence a = testutil::random_pose(rng, 2, 6), b = testutil::random_pose(rng, 2, 4);
  const auto stats = sf::collect_joint_stats({a, b});
  const auto clean = sf::make_progressive_batch({{4}, {5}}, {&a, &b}, 1);

  auto off = clean;
  sf::Rng r0(1);
  sf::gaussian_noise_augment(off, stats, 0.0, r0);
  CHECK(off.input_frames == clean.input_frames);

  sf::JointStats zero = stats;
  for (auto& s : zero.stddev) s = 0;
  auto flat = clean;
  sf::gaussian_noise_augment(flat, zero, 5.0, r0);
  CHECK(flat.input_frames == clean.input_frames);

  auto x = clean, y = clean;
  sf::Rng rx(7), ry(7);
  sf::gaussian_noise_augment(x, stats, 5.0, rx);
  sf::gaussian_noise_augment(y, stats, 5.0, ry);
  CHECK(x.input_frames == y.input_frames);
  CHECK(x.input_frames != clean.input_frames);
  CHECK(x.targets == clean.targets);
  CHECK(x.input_counters == clean.input_counters);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t u = 0; u < clean.frames; ++u) {
      const bool touched = u > 0 && clean.valid[i * clean.frames + u];
      bool changed = false;
      for (std::size_t c = 0; c < 6; ++c) {
        changed |= x.input_frames[(i * clean.frames + u) * 6 + c] != clean.input_frames[(i * clean.frames + u) * 6 + c];
      }
      CHECK(changed == touched);
    }
  }
}

TEST_CASE("noise scale follows the factor") {
  sf::JointStats stats;
  stats.mean = {0};
  stats.stddev = {0.5};
  std::vector<Real> frames(20000, 0);
  const std::vector<std::uint8_t> rows(20000, 1);
  sf::Rng rng(8);
  sf::gaussian_noise_augment(frames, 1, rows, stats, 4.0, rng);
  double sq = 0.0;
  for (Real v : frames) sq += static_cast<double>(v) * v;
  CHECK(std::sqrt(sq / 20000.0) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("augmentation config") {
  sf::AugmentationConfig cfg;
  CHECK(cfg.effective_horizon() == 1);
  cfg.future_prediction = true;
  CHECK(cfg.effective_horizon() == 10);
  cfg.noise_factor = -1;
  CHECK_THROWS_AS(cfg.validate(), sf::ParameterError);
  CHECK(sf::parse_noise_source("positional") == sf::NoiseSource::kPositional);
  CHECK_THROWS_AS(sf::parse_noise_source("other"), sf::ConfigError);
}
