// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Slower end-to-end learning checks on small synthetic problems.

#include <cstdlib>
#include <sstream>
#include <string>

#include "doctest.h"
#include "signforge/pipeline.hpp"

namespace {

double last_loss(const std::string& log) {
  double loss = -1.0;
  std::istringstream in(log);
  std::string line;
  while (std::getline(in, line)) {
    const auto at = line.find(" loss=");
    if (line.rfind("epoch=", 0) == 0 && at != std::string::npos) loss = std::atof(line.c_str() + at + 6);
  }
  return loss;
}

}  // namespace

TEST_CASE("symbolic transformer learns to copy") {
  sf::ToyCorpusConfig toy;
  toy.vocab_size = 12;
  toy.train = 300;
  toy.dev = 30;
  toy.identity_gloss = true;
  const auto corpus = sf::make_toy_corpus(toy);
  sf::RunConfig cfg;
  cfg.task = sf::Task::kTextToGloss;
  cfg.model = {1, 4, 32, 64, 64};
  cfg.train.epochs = 30;
  cfg.train.batch_size = 16;
  const auto summary = sf::train_model(cfg, corpus.train, corpus.dev, "");
  CHECK(summary.best_metric >= 0.95);
}

TEST_CASE("symbolic transformer memorizes fifty pairs within 500 steps") {
  sf::ToyCorpusConfig toy;
  toy.train = 50;
  toy.dev = 2;
  toy.test = 2;
  const auto corpus = sf::make_toy_corpus(toy);
  sf::RunConfig cfg;
  cfg.task = sf::Task::kTextToGloss;
  cfg.model = {2, 4, 64, 256, 64};
  cfg.train.epochs = 500;
  cfg.train.batch_size = 50;
  cfg.train.eval_every = 50;
  cfg.train.patience = 100;
  const auto summary = sf::train_model(cfg, corpus.train, corpus.train, "");
  CHECK(summary.best_metric > 0.99);
}

TEST_CASE("progressive transformer fits a handful of sequences") {
  sf::ToyCorpusConfig toy;
  toy.vocab_size = 8;
  toy.train = 10;
  toy.dev = 2;
  toy.test = 2;
  const auto corpus = sf::make_toy_corpus(toy);
  sf::RunConfig cfg;
  cfg.task = sf::Task::kGlossToPose;
  cfg.model = {2, 4, 64, 256, 64};
  cfg.train.batch_size = 10;
  cfg.train.epochs = 2000;
  cfg.train.eval_every = 2000;
  const auto summary = sf::train_model(cfg, corpus.train, corpus.dev, "");
  CHECK(last_loss(summary.log) < 1e-3);
}
