// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "signforge/checkpoint.hpp"
#include "signforge/config.hpp"
#include "signforge/errors.hpp"
#include "signforge/pipeline.hpp"
#include "test_util.hpp"

using sf::Real;

namespace {

sf::ToyCorpus tiny_corpus() {
  sf::ToyCorpusConfig toy;
  toy.vocab_size = 8;
  toy.train = 16;
  toy.dev = 4;
  toy.test = 4;
  toy.min_tokens = 2;
  toy.max_tokens = 3;
  return sf::make_toy_corpus(toy);
}

sf::RunConfig tiny_config(sf::Task task) {
  sf::RunConfig cfg;
  cfg.task = task;
  cfg.model = {1, 2, 16, 32, 64};
  cfg.d_counter = 4;
  cfg.train.batch_size = 8;
  cfg.train.epochs = 2;
  cfg.train.patience = 5;
  return cfg;
}

std::vector<float> flat_parameters(const sf::ModelBundle& m) {
  std::vector<float> out;
  for (const auto& [name, t] : m.parameters().entries()) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

}  // namespace

TEST_CASE("config parsing and canonical text") {
  const auto cfg = sf::RunConfig::parse(
      "# comment\n\ntask = g2p\nmodel.layers=1\nmodel.heads=2\nmodel.d_model=32\ntrain.lr=0.0005\n"
      "augment.future_prediction=true\naugment.future_horizon=4\naugment.noise_source=positional\n"
      "eval.mode=free\ntoy.gloss_order=identity\n");
  CHECK(cfg.task == sf::Task::kGlossToPose);
  CHECK(cfg.model.num_layers == 1);
  CHECK(cfg.train.learning_rate == 0.0005);
  CHECK(cfg.augment.effective_horizon() == 4);
  CHECK(cfg.augment.noise_source == sf::NoiseSource::kPositional);
  CHECK(cfg.eval.mode == sf::ProductionMode::kFreeRunning);
  CHECK(cfg.toy.identity_gloss);
  const auto again = sf::RunConfig::parse(cfg.to_text());
  CHECK(again.to_text() == cfg.to_text());
}

TEST_CASE("config defaults") {
  const sf::RunConfig cfg;
  CHECK(cfg.model.num_layers == 2);
  CHECK(cfg.model.num_heads == 8);
  CHECK(cfg.model.d_model == 256);
  CHECK(cfg.model.ff_width() == 1024);
  CHECK(cfg.train.learning_rate == 1e-3);
  CHECK(cfg.train.batch_size == 32);
  CHECK(cfg.train.epochs == 100);
  CHECK(cfg.train.patience == 10);
  CHECK(cfg.augment.future_horizon == 10);
  CHECK(cfg.augment.noise_factor == 5.0);
  CHECK(cfg.eval.stop_threshold == 0.98);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(sf::RunConfig::parse("model.unknown=1\n"), sf::ConfigError);
  CHECK_THROWS_AS(sf::RunConfig::parse("task=x2y\n"), sf::ConfigError);
  CHECK_THROWS_AS(sf::RunConfig::parse("model.layers=two\n"), sf::ConfigError);
  CHECK_THROWS_AS(sf::RunConfig::parse("no equals sign\n"), sf::ConfigError);
  CHECK_THROWS_AS(sf::RunConfig::parse("augment.future_prediction=maybe\n"), sf::ConfigError);
  auto cfg = sf::RunConfig::parse("augment.just_counter=true\naugment.gaussian_noise=true\n");
  CHECK_THROWS_AS(cfg.validate(), sf::ConfigError);
  try {
    sf::RunConfig::parse("task=t2p\nbogus=1\n", "run.cfg");
    FAIL("expected a config error");
  } catch (const sf::ConfigError& e) {
    CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
  }
}

TEST_CASE("checkpoint serialization round trip") {
  sf::Checkpoint ck;
  ck.config_text = "task=t2p\n";
  ck.source_vocab = {"<pad>", "<bos>", "<eos>", "<unk>", "a"};
  ck.joints = 5;
  ck.epoch = 3;
  ck.step = 77;
  ck.rng_state = "state";
  ck.tensors.push_back({"w", {2, 2}, {1.5f, -0.0f, 3e-39f, 7.25f}});
  ck.has_optimizer = true;
  ck.adam_step = 9;
  ck.adam_lr = 1e-3;
  ck.adam_beta1 = 0.9;
  ck.adam_beta2 = 0.999;
  ck.adam_epsilon = 1e-8;
  ck.adam_first.push_back({"w", {2, 2}, {0.1f, 0.2f, 0.3f, 0.4f}});
  ck.adam_second.push_back({"w", {2, 2}, {0.5f, 0.6f, 0.7f, 0.8f}});
  const auto bytes = sf::serialize_checkpoint(ck);
  const auto back = sf::deserialize_checkpoint(bytes);
  CHECK(sf::serialize_checkpoint(back) == bytes);
  CHECK(back.tensors[0].values == ck.tensors[0].values);
  CHECK(back.step == 77);
  CHECK(back.adam_second[0].values == ck.adam_second[0].values);
}

TEST_CASE("corrupted checkpoints are rejected") {
  sf::Checkpoint ck;
  ck.config_text = "task=t2p\n";
  ck.tensors.push_back({"w", {3}, {1, 2, 3}});
  const auto bytes = sf::serialize_checkpoint(ck);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(sf::deserialize_checkpoint(magic), sf::LoadError);
  auto version = bytes;
  version[4] = 2;
  CHECK_THROWS_AS(sf::deserialize_checkpoint(version), sf::LoadError);
  for (std::size_t cut : {std::size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
    CHECK_THROWS_AS(sf::deserialize_checkpoint(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + cut)),
                    sf::LoadError);
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(sf::deserialize_checkpoint(flipped), sf::LoadError);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(sf::deserialize_checkpoint(extra), sf::LoadError);
  CHECK_THROWS_AS(sf::load_checkpoint("/nonexistent/model.ckpt"), sf::Error);
}

TEST_CASE("restoring into a mismatched model names the offending tensor") {
  const auto corpus = tiny_corpus();
  const auto cfg = tiny_config(sf::Task::kTextToPose);
  std::vector<sf::TokenSeq> texts;
  for (const auto& s : corpus.train) texts.push_back(s.text);
  sf::ModelBundle model(cfg, sf::Vocabulary::build(texts), sf::Vocabulary(), 5);
  auto ck = model.checkpoint();
  ck.tensors[1].shape.back() += 1;
  ck.tensors[1].values.resize(sf::shape_numel(ck.tensors[1].shape));
  sf::ParameterStore& store = model.parameters();
  try {
    sf::restore_parameters(ck, store);
    FAIL("expected a load error");
  } catch (const sf::LoadError& e) {
    CHECK(std::string(e.what()).find(ck.tensors[1].name) != std::string::npos);
  }
}

TEST_CASE("checkpoint save and load reproduces forward outputs bitwise") {
  testutil::TempDir dir("ckpt");
  const auto corpus = tiny_corpus();
  auto cfg = tiny_config(sf::Task::kTextToPose);
  const auto summary = sf::train_model(cfg, corpus.train, corpus.dev, dir.str());
  const auto loaded = sf::ModelBundle::load(dir / "model.ckpt");
  CHECK(flat_parameters(*loaded) == flat_parameters(*summary.best));
  const auto a = sf::produce_poses(*summary.best, nullptr, corpus.dev, sf::ProductionMode::kFreeRunning, 12);
  const auto b = sf::produce_poses(*loaded, nullptr, corpus.dev, sf::ProductionMode::kFreeRunning, 12);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].frames == b[i].frames);
  CHECK(loaded->describe() == summary.best->describe());
}

TEST_CASE("training with zero learning rate leaves parameters unchanged") {
  const auto corpus = tiny_corpus();
  auto cfg = tiny_config(sf::Task::kGlossToPose);
  cfg.train.learning_rate = 0.0;
  cfg.train.epochs = 1;
  std::vector<sf::TokenSeq> glosses;
  for (const auto& s : corpus.train) glosses.push_back(*s.gloss);
  const sf::ModelBundle fresh(cfg, sf::Vocabulary::build(glosses), sf::Vocabulary(), 5);
  const auto summary = sf::train_model(cfg, corpus.train, corpus.dev, "");
  CHECK(flat_parameters(*summary.best) == flat_parameters(fresh));
}

TEST_CASE("seeded training is reproducible and logs every epoch") {
  const auto corpus = tiny_corpus();
  auto cfg = tiny_config(sf::Task::kTextToPose);
  cfg.augment.future_prediction = true;
  cfg.augment.future_horizon = 3;
  cfg.augment.gaussian_noise = true;
  cfg.train.epochs = 3;
  const auto a = sf::train_model(cfg, corpus.train, corpus.dev, "");
  const auto b = sf::train_model(cfg, corpus.train, corpus.dev, "");
  CHECK(a.log == b.log);
  CHECK(a.log.find("epoch=3 ") != std::string::npos);
  CHECK(a.log.find("noise_scale=") != std::string::npos);
  CHECK(a.log.rfind("# task=t2p seed=1", 0) == 0);
}

TEST_CASE("future prediction with horizon one reproduces the baseline") {
  const auto corpus = tiny_corpus();
  auto base = tiny_config(sf::Task::kGlossToPose);
  auto fp = base;
  fp.augment.future_prediction = true;
  fp.augment.future_horizon = 1;
  CHECK(sf::train_model(base, corpus.train, corpus.dev, "").log ==
        sf::train_model(fp, corpus.train, corpus.dev, "").log);
}

TEST_CASE("augmentation is rejected for symbolic tasks") {
  const auto corpus = tiny_corpus();
  auto cfg = tiny_config(sf::Task::kTextToGloss);
  cfg.augment.just_counter = true;
  CHECK_THROWS_AS(sf::train_model(cfg, corpus.train, corpus.dev, ""), sf::ConfigError);
}

TEST_CASE("text-to-pose never reads gloss") {
  auto corpus = tiny_corpus();
  auto cfg = tiny_config(sf::Task::kTextToPose);
  const auto with = sf::train_model(cfg, corpus.train, corpus.dev, "");
  for (auto* split : {&corpus.train, &corpus.dev}) {
    for (auto& s : *split) s.gloss.reset();
  }
  const auto without = sf::train_model(cfg, corpus.train, corpus.dev, "");
  CHECK(with.log == without.log);
  auto g2p = tiny_config(sf::Task::kGlossToPose);
  CHECK_THROWS_AS(sf::train_model(g2p, corpus.train, corpus.dev, ""), sf::LoadError);
}

TEST_CASE("production mse pads the shorter sequence with its last frame") {
  const auto a = sf::make_pose_sequence(1, {0, 0, 0, 1, 1, 1});
  const auto b = sf::make_pose_sequence(1, {0, 0, 0, 1, 1, 1, 3, 3, 3});
  CHECK(sf::production_mse(a, a) == 0);
  CHECK(sf::production_mse(a, b) == doctest::Approx(4.0 / 3.0));
  CHECK(sf::production_mse(b, a) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("text-to-gloss-to-pose production and evaluation") {
  testutil::TempDir dir("t2g2p");
  const auto corpus = tiny_corpus();
  const auto t2g = sf::train_model(tiny_config(sf::Task::kTextToGloss), corpus.train, corpus.dev, "");
  const auto g2p = sf::train_model(tiny_config(sf::Task::kGlossToPose), corpus.train, corpus.dev, "");
  const auto p2t = sf::train_model(tiny_config(sf::Task::kPoseToText), corpus.train, corpus.dev, "");
  const auto poses = sf::produce_poses(*t2g.best, g2p.best.get(), corpus.dev, sf::ProductionMode::kCounterDriven);
  REQUIRE(poses.size() == corpus.dev.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(poses[i].length() == corpus.dev[i].pose.length());
    CHECK(poses[i].joints == 5);
  }
  CHECK_THROWS_AS(sf::produce_poses(*t2g.best, nullptr, corpus.dev, sf::ProductionMode::kFreeRunning),
                  sf::ParameterError);

  sf::write_productions(dir.str(), "dev", corpus.dev, poses);
  std::vector<sf::ParallelSample> matched;
  const auto read = sf::read_productions(dir.str(), "dev", corpus.dev, &matched);
  CHECK(read.size() == poses.size());
  const auto report = sf::evaluate_productions(*p2t.best, read, matched);
  CHECK(report.bleu[0] >= 0);
  CHECK(report.dtw_mean >= 0);

  testutil::TempDir empty("empty_prod");
  CHECK_THROWS_AS(sf::read_productions(empty.str(), "dev", corpus.dev, &matched), sf::Error);

  sf::ToyCorpusConfig other;
  other.joints = 6;
  other.train = 4;
  other.dev = 2;
  other.test = 2;
  const auto foreign = sf::make_toy_corpus(other);
  std::vector<sf::PoseSequence> foreign_poses;
  for (const auto& s : foreign.dev) foreign_poses.push_back(s.pose);
  CHECK_THROWS_AS(sf::back_translate(*p2t.best, foreign_poses), sf::ParameterError);
}

TEST_CASE("evaluating ground truth with an identity production scores what the back-translator scores") {
  const auto corpus = tiny_corpus();
  const auto p2t = sf::train_model(tiny_config(sf::Task::kPoseToText), corpus.train, corpus.dev, "");
  std::vector<sf::PoseSequence> gt;
  std::vector<sf::TokenSeq> refs;
  for (const auto& s : corpus.dev) {
    gt.push_back(s.pose);
    refs.push_back(s.text);
  }
  const auto report = sf::evaluate_productions(*p2t.best, gt, corpus.dev);
  const auto direct = sf::score_translations(sf::back_translate(*p2t.best, gt), refs);
  CHECK(report.bleu == direct.bleu);
  CHECK(report.dtw_mean == 0);
}
