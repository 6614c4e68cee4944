// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "signforge/errors.hpp"
#include "signforge/pose_to_text.hpp"
#include "signforge/progressive.hpp"
#include "signforge/symbolic.hpp"
#include "signforge/vocabulary.hpp"
#include "test_util.hpp"

using sf::Real;
using sf::Tensor;

namespace {

sf::ModelConfig tiny(int layers = 1, int heads = 2, int d_model = 16) { return {layers, heads, d_model, 32, 64}; }

void set_all(Tensor t, Real value) {
  for (Real& v : t.mutable_data()) v = value;
}

}  // namespace

TEST_CASE("token embedding examples") {
  std::vector<Real> eye(16, 0);
  for (int i = 0; i < 4; ++i) eye[i * 5] = 1;
  const Tensor w({4, 4}, eye), zero_bias({4}, 0);
  const std::vector<int> first = {0};
  const Tensor e = sf::embed_tokens(first, w, zero_bias, false);
  CHECK(std::vector<Real>(e.data().begin(), e.data().end()) == std::vector<Real>{1, 0, 0, 0});

  const std::vector<int> repeated = {2, 1, 1, 1, 1, 2};
  const Tensor p = sf::embed_tokens(repeated, w, zero_bias, true);
  const auto pe0 = sf::positional_encoding(0, 4), pe5 = sf::positional_encoding(5, 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(p[c] - p[20 + c] == doctest::Approx(pe0[c] - pe5[c]));

  const Tensor bias_only = sf::embed_tokens(repeated, Tensor({4, 4}), Tensor({4}, {1, 2, 3, 4}), false);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(bias_only[t * 4 + c] == bias_only[c]);
  }
  const std::vector<int> bad = {4};
  CHECK_THROWS_AS(sf::embed_tokens(bad, w, zero_bias), sf::VocabularyError);
}

TEST_CASE("vocabulary reserves indices and round trips") {
  const auto v = sf::Vocabulary::build({{"b", "a", "b"}, {"c", "<pad>", "a", "b"}});
  CHECK(v.size() == 7);
  CHECK(v.token(sf::Vocabulary::kPad) == "<pad>");
  CHECK(v.index("b") == 4);
  CHECK(v.index("a") == 5);
  CHECK(v.index("zzz") == sf::Vocabulary::kUnk);
  const std::vector<int> ids = {5, 4, sf::Vocabulary::kEos, 6};
  CHECK(v.decode(ids) == std::vector<std::string>{"a", "b"});
  CHECK(sf::Vocabulary::from_tokens(v.tokens()).tokens() == v.tokens());
  CHECK_THROWS_AS(sf::Vocabulary::from_tokens({"x", "y"}), sf::VocabularyError);
}

TEST_CASE("greedy translation stops immediately when EOS dominates") {
  sf::SymbolicTransformer model(tiny(), 10, 10, 3);
  set_all(model.decoder().output_layer().weight(), 0);
  Tensor bias = model.decoder().output_layer().bias();
  set_all(bias, 0);
  bias.mutable_data()[sf::Vocabulary::kEos] = 10;
  CHECK(model.translate_greedy({4, 5, 6}, 20).empty());
}

TEST_CASE("greedy translation is deterministic and bounded") {
  sf::SymbolicTransformer model(tiny(), 12, 12, 4);
  sf::Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto src = testutil::random_tokens(rng, 12, {1 + rng.below(6)})[0];
    const auto a = model.translate_greedy(src, 7);
    CHECK(a == model.translate_greedy(src, 7));
    CHECK(a.size() <= 7);
    for (int t : a) {
      CHECK(t != sf::Vocabulary::kBos);
      CHECK(t != sf::Vocabulary::kEos);
    }
  }
}

TEST_CASE("batched greedy translation matches one-at-a-time translation") {
  sf::SymbolicTransformer model(tiny(2, 4, 16), 12, 12, 5);
  sf::Rng rng(2);
  const auto sources = testutil::random_tokens(rng, 12, {3, 6, 1, 4});
  const auto batched = model.translate_batch(sources, 9);
  for (std::size_t i = 0; i < sources.size(); ++i) CHECK(batched[i] == model.translate_greedy(sources[i], 9));
}

TEST_CASE("symbolic loss is invariant to batch order and equals unbatched sums") {
  sf::SymbolicTransformer model(tiny(2, 2, 16), 12, 12, 6);
  sf::Rng rng(3);
  const auto src = testutil::random_tokens(rng, 12, {3, 5, 2});
  const auto tgt = testutil::random_tokens(rng, 12, {4, 1, 3});
  sf::NoGradGuard guard;
  const double total = model.loss(sf::make_symbolic_batch(src, tgt), sf::Reduction::kSum).item();
  const double reversed =
      model.loss(sf::make_symbolic_batch({src[2], src[1], src[0]}, {tgt[2], tgt[1], tgt[0]}), sf::Reduction::kSum)
          .item();
  double singles = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    singles += model.loss(sf::make_symbolic_batch({src[i]}, {tgt[i]}), sf::Reduction::kSum).item();
  }
  CHECK(std::abs(total - reversed) <= 1e-5 * std::abs(total));
  CHECK(std::abs(total - singles) <= 1e-5 * std::abs(total));
}

TEST_CASE("symbolic batch layout") {
  const auto b = sf::make_symbolic_batch({{5, 6}, {7}}, {{8}, {9, 10, 11}});
  CHECK(b.source.length == 3);
  CHECK(b.source.ids == std::vector<int>{5, 6, 2, 7, 2, 0});
  CHECK(b.target_in.ids == std::vector<int>{1, 8, 0, 0, 1, 9, 10, 11});
  CHECK(b.target_out == std::vector<int>{8, 2, 0, 0, 9, 10, 11, 2});
  CHECK(b.target_tokens() == 6);
}

TEST_CASE("counter schedule") {
  CHECK(sf::counter_schedule(4) == std::vector<Real>{0.25, 0.5, 0.75, 1.0});
  CHECK(sf::counter_schedule(1) == std::vector<Real>{1.0});
  const auto c = sf::counter_schedule(37);
  CHECK(c.back() == 1);
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] > c[i - 1]);
  CHECK_THROWS_AS(sf::counter_schedule(0), sf::ParameterError);
}

TEST_CASE("joint embedding examples") {
  sf::Rng rng(4);
  const Tensor w = testutil::random_tensor({6, 5}, rng);
  const Tensor zero_b({5}, 0);
  const Tensor z = sf::embed_joints(Tensor({1, 6}), w, zero_b);
  for (Real v : z.data()) CHECK(v == 0);
  const Tensor a = testutil::random_tensor({1, 6}, rng), b = testutil::random_tensor({1, 6}, rng);
  const Tensor sum_embed = sf::embed_joints(sf::add(a, b), w, zero_b);
  const Tensor embed_sum = sf::add(sf::embed_joints(a, w, zero_b), sf::embed_joints(b, w, zero_b));
  for (std::size_t i = 0; i < 5; ++i) CHECK(sum_embed[i] == doctest::Approx(embed_sum[i]).epsilon(1e-6));
  CHECK_THROWS_AS(sf::embed_joints(Tensor({1, 5}), w, zero_b), sf::DimensionError);
}

TEST_CASE("counter embedding examples") {
  sf::Rng rng(5);
  const Tensor cw = testutil::random_tensor({1, 3}, rng);
  const Tensor zero_cb({3}, 0);
  const Tensor j = testutil::random_tensor({2, 5}, rng);
  const Tensor at_zero = sf::counter_embed(j, Tensor({2, 1}, {0, 0}), cw, zero_cb);
  CHECK(at_zero.shape() == sf::Shape{2, 8});
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 5; c < 8; ++c) CHECK(at_zero[r * 8 + c] == 0);
  }
  const Tensor same_pose({2, 5}, std::vector<Real>{1, 2, 3, 4, 5, 1, 2, 3, 4, 5});
  const Tensor e = sf::counter_embed(same_pose, Tensor({2, 1}, {0.25, 0.75}), cw, zero_cb);
  for (std::size_t c = 0; c < 5; ++c) CHECK(e[c] == e[8 + c]);
  bool differs = false;
  for (std::size_t c = 5; c < 8; ++c) differs |= e[c] != e[8 + c];
  CHECK(differs);
  CHECK_THROWS_AS(sf::counter_embed(j, Tensor({2, 1}, {0.5, 1.5}), cw, zero_cb), sf::ContractError);
}

TEST_CASE("pose embedding width equals d_model") {
  sf::ParameterStore store;
  sf::Rng rng(6);
  sf::PoseEmbedding emb(store, "e", 16, 4, 3, false, rng);
  const Tensor out = emb.forward(Tensor({2, 5, 9}), Tensor({2, 5, 1}));
  CHECK(out.shape() == sf::Shape{2, 5, 16});
}

TEST_CASE("progressive readout width and decode step") {
  const sf::ProgressiveConfig cfg{tiny(), 3, 4, 1, false};
  CHECK(cfg.output_width() == 10);
  sf::ProgressiveTransformer model(cfg, 10, 7);
  sf::Rng rng(7);
  const sf::PoseSequence pose = testutil::random_pose(rng, 3, 5);
  const auto batch = sf::make_progressive_batch({{4, 5, 6}}, {&pose}, 1);
  const Tensor out = model.forward(batch);
  CHECK(out.shape() == sf::Shape{1, 5, 10});

  sf::NoGradGuard guard;
  const Tensor memory = model.encode(sf::sources_with_eos({{4, 5, 6}}));
  const std::vector<Real> frames(2 * 9, Real(0.1));
  const std::vector<Real> counters = {0, 0.2};
  const auto a = model.decode_step(memory, frames, counters);
  const auto b = model.decode_step(memory, frames, counters);
  CHECK(a.pose.size() == 9);
  CHECK(a.pose == b.pose);
  CHECK(a.counter == b.counter);
  CHECK(a.counter >= 0);
  CHECK(a.counter <= 1);
}

TEST_CASE("progressive decoding is causal over the input history") {
  const sf::ProgressiveConfig cfg{tiny(2, 4, 16), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 8);
  sf::Rng rng(8);
  sf::NoGradGuard guard;
  const Tensor memory = model.encode(sf::sources_with_eos({{4, 7}}));
  const std::vector<std::uint8_t> mem_valid(3, 1), in_valid(6, 1);
  std::vector<Real> frames = testutil::random_values(6 * 6, rng);
  std::vector<Real> counters = sf::counter_schedule(6);
  const Tensor ref = model.decode(memory, mem_valid, Tensor({1, 6, 6}, frames), Tensor({1, 6, 1}, counters), in_valid);
  for (std::size_t c = 0; c < 6; ++c) frames[4 * 6 + c] += 3;
  const Tensor out = model.decode(memory, mem_valid, Tensor({1, 6, 6}, frames), Tensor({1, 6, 1}, counters), in_valid);
  const std::size_t w = cfg.output_width();
  for (std::size_t i = 0; i < 4 * w; ++i) CHECK(out[i] == ref[i]);
  bool changed = false;
  for (std::size_t i = 4 * w; i < 6 * w; ++i) changed |= out[i] != ref[i];
  CHECK(changed);
}

TEST_CASE("counter at one stops production after one frame") {
  const sf::ProgressiveConfig cfg{tiny(), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 9);
  set_all(model.parameters().find("decoder.output.weight"), 0);
  Tensor bias = model.parameters().find("decoder.output.bias");
  set_all(bias, 0);
  bias.mutable_data()[6] = 1;
  sf::ProductionOptions opts;
  opts.mode = sf::ProductionMode::kFreeRunning;
  const auto out = model.produce({{4, 5}, {6}}, opts);
  REQUIRE(out.size() == 2);
  for (const auto& p : out) {
    CHECK(p.length() == 1);
    CHECK(p.counters.back() == 1);
  }
}

TEST_CASE("free running respects the frame budget") {
  const sf::ProgressiveConfig cfg{tiny(), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 10);
  set_all(model.parameters().find("decoder.output.weight"), 0);
  set_all(model.parameters().find("decoder.output.bias"), 0);
  sf::ProductionOptions opts;
  opts.max_frames = 5;
  const auto out = model.produce({{4, 5, 6}}, opts);
  CHECK(out[0].length() == 5);
}

TEST_CASE("counter-driven production follows the given timing") {
  const sf::ProgressiveConfig cfg{tiny(), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 11);
  sf::ProductionOptions opts;
  opts.mode = sf::ProductionMode::kCounterDriven;
  const std::vector<std::vector<Real>> timing = {sf::counter_schedule(7), sf::counter_schedule(2)};
  const auto out = model.produce({{4, 5}, {6, 7, 8}}, opts, &timing);
  CHECK(out[0].length() == 7);
  CHECK(out[1].length() == 2);
  CHECK(out[0].counters == timing[0]);
  CHECK_THROWS_AS(model.produce({{4}}, opts), sf::ParameterError);
}

TEST_CASE("batched production matches one-at-a-time production") {
  const sf::ProgressiveConfig cfg{tiny(2, 2, 16), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 12);
  sf::ProductionOptions opts;
  opts.max_frames = 6;
  const std::vector<std::vector<int>> sources = {{4, 5, 6}, {7}, {8, 9}};
  const auto batched = model.produce(sources, opts);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto single = model.produce({sources[i]}, opts)[0];
    REQUIRE(single.length() == batched[i].length());
    for (std::size_t k = 0; k < single.frames.size(); ++k) {
      CHECK(single.frames[k] == doctest::Approx(batched[i].frames[k]).epsilon(1e-5));
    }
  }
}

TEST_CASE("padded progressive batch agrees with unbatched passes") {
  const sf::ProgressiveConfig cfg{tiny(2, 4, 16), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 13);
  sf::Rng rng(13);
  const sf::PoseSequence a = testutil::random_pose(rng, 2, 6), b = testutil::random_pose(rng, 2, 3);
  const std::vector<std::vector<int>> sources = {{4, 5}, {6, 7, 8, 9}};
  sf::NoGradGuard guard;
  const auto batch = sf::make_progressive_batch(sources, {&a, &b}, 1);
  const Tensor joint = model.forward(batch);
  const std::size_t w = cfg.output_width();
  double batched_sum = 0.0, single_sum = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const sf::PoseSequence& p = i == 0 ? a : b;
    const auto single_batch = sf::make_progressive_batch({sources[i]}, {&p}, 1);
    const Tensor single = model.forward(single_batch);
    for (std::size_t u = 0; u < p.length(); ++u) {
      for (std::size_t c = 0; c < w; ++c) {
        const Real x = joint[(i * batch.frames + u) * w + c];
        CHECK(x == doctest::Approx(single[u * w + c]).epsilon(1e-5));
        const double ea = x - batch.targets[(i * batch.frames + u) * w + c];
        const double eb = single[u * w + c] - single_batch.targets[u * w + c];
        batched_sum += ea * ea;
        single_sum += eb * eb;
      }
    }
  }
  CHECK(std::abs(batched_sum - single_sum) <= 1e-5 * single_sum);
  const double mean = model.loss(batch).item();
  CHECK(mean == doctest::Approx(batched_sum / static_cast<double>(9 * w)).epsilon(1e-5));
}

TEST_CASE("gradient of the pose loss reaches the source embedding") {
  const sf::ProgressiveConfig cfg{tiny(2, 4, 16), 2, 4, 1, false};
  sf::ProgressiveTransformer model(cfg, 10, 14);
  sf::Rng rng(14);
  const sf::PoseSequence a = testutil::random_pose(rng, 2, 4);
  model.parameters().zero_grad();
  model.loss(sf::make_progressive_batch({{4, 5, 6}}, {&a}, 1)).backward();
  const Tensor w = model.parameters().find("encoder.embed.weight");
  REQUIRE(w.defined());
  double norm = 0.0;
  for (Real g : w.grad()) norm += g * g;
  CHECK(norm > 0.0);
}

TEST_CASE("progressive batch uses the zero start frame") {
  sf::Rng rng(15);
  const sf::PoseSequence a = testutil::random_pose(rng, 1, 3);
  const auto b = sf::make_progressive_batch({{4}}, {&a}, 1);
  for (std::size_t c = 0; c < 3; ++c) CHECK(b.input_frames[c] == 0);
  CHECK(b.input_counters[0] == 0);
  for (std::size_t c = 0; c < 3; ++c) CHECK(b.input_frames[3 + c] == a.frames[c]);
  CHECK(b.input_counters[1] == a.counters[0]);
  for (std::size_t c = 0; c < 3; ++c) CHECK(b.targets[c] == a.frames[c]);
  CHECK(b.targets[3] == a.counters[0]);
}

TEST_CASE("pose-to-text model translates batched and rejects a foreign rig") {
  sf::PoseToTextTransformer model(tiny(), 4, 2, 9, 15);
  sf::Rng rng(16);
  const sf::PoseSequence a = testutil::random_pose(rng, 2, 5), b = testutil::random_pose(rng, 2, 2);
  const auto out = model.translate_batch({&a, &b}, 6);
  CHECK(out.size() == 2);
  for (const auto& s : out) CHECK(s.size() <= 6);
  const sf::PoseSequence wrong = testutil::random_pose(rng, 3, 2);
  CHECK_THROWS_AS(model.translate_batch({&wrong}, 6), sf::ParameterError);
}
