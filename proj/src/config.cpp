// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "signforge/errors.hpp"

namespace sf {

std::string task_name(Task task) {
  switch (task) {
    case Task::kTextToGloss: return "t2g";
    case Task::kGlossToPose: return "g2p";
    case Task::kTextToPose: return "t2p";
    case Task::kPoseToText: return "p2t";
  }
  return "?";
}

Task parse_task(const std::string& text) {
  if (text == "t2g") return Task::kTextToGloss;
  if (text == "g2p") return Task::kGlossToPose;
  if (text == "t2p") return Task::kTextToPose;
  if (text == "p2t") return Task::kPoseToText;
  throw ConfigError("task must be one of t2g, g2p, t2p, p2t; got '" + text + "'");
}

bool is_production_task(Task task) { return task == Task::kGlossToPose || task == Task::kTextToPose; }

std::string mode_name(ProductionMode mode) {
  return mode == ProductionMode::kFreeRunning ? "free" : "counter-driven";
}

ProductionMode parse_mode(const std::string& text) {
  if (text == "free") return ProductionMode::kFreeRunning;
  if (text == "counter-driven") return ProductionMode::kCounterDriven;
  throw ConfigError("mode must be free or counter-driven; got '" + text + "'");
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("value '" + value + "' for " + key + " is not a valid number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("value '" + value + "' for " + key + " is not a boolean");
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "task") {
    task = parse_task(value);
  } else if (key == "data.dir") {
    data_dir = value;
  } else if (key == "data.normalize") {
    normalize = parse_bool(key, value);
  } else if (key == "model.layers") {
    model.num_layers = parse_number<int>(key, value);
  } else if (key == "model.heads") {
    model.num_heads = parse_number<int>(key, value);
  } else if (key == "model.d_model") {
    model.d_model = parse_number<int>(key, value);
  } else if (key == "model.d_ff") {
    model.d_ff = parse_number<int>(key, value);
  } else if (key == "model.d_counter") {
    d_counter = parse_number<int>(key, value);
  } else if (key == "model.max_seq_len") {
    model.max_seq_len = parse_number<int>(key, value);
  } else if (key == "train.lr") {
    train.learning_rate = parse_number<double>(key, value);
  } else if (key == "train.batch_size") {
    train.batch_size = parse_number<int>(key, value);
  } else if (key == "train.epochs") {
    train.epochs = parse_number<int>(key, value);
  } else if (key == "train.patience") {
    train.patience = parse_number<int>(key, value);
  } else if (key == "train.eval_every") {
    train.eval_every = parse_number<int>(key, value);
  } else if (key == "train.seed") {
    train.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "eval.backtranslation") {
    eval.backtranslation = value;
  } else if (key == "eval.mode") {
    eval.mode = parse_mode(value);
  } else if (key == "eval.stop_threshold") {
    eval.stop_threshold = parse_number<double>(key, value);
  } else if (key == "eval.max_frames") {
    eval.max_frames = parse_number<int>(key, value);
  } else if (key == "eval.max_tokens") {
    eval.max_tokens = parse_number<int>(key, value);
  } else if (key == "augment.future_prediction") {
    augment.future_prediction = parse_bool(key, value);
  } else if (key == "augment.future_horizon") {
    augment.future_horizon = parse_number<int>(key, value);
  } else if (key == "augment.just_counter") {
    augment.just_counter = parse_bool(key, value);
  } else if (key == "augment.gaussian_noise") {
    augment.gaussian_noise = parse_bool(key, value);
  } else if (key == "augment.noise_factor") {
    augment.noise_factor = parse_number<double>(key, value);
  } else if (key == "augment.noise_source") {
    augment.noise_source = parse_noise_source(value);
  } else if (key == "toy.vocab_size") {
    toy.vocab_size = parse_number<int>(key, value);
  } else if (key == "toy.train") {
    toy.train = parse_number<int>(key, value);
  } else if (key == "toy.dev") {
    toy.dev = parse_number<int>(key, value);
  } else if (key == "toy.test") {
    toy.test = parse_number<int>(key, value);
  } else if (key == "toy.min_tokens") {
    toy.min_tokens = parse_number<int>(key, value);
  } else if (key == "toy.max_tokens") {
    toy.max_tokens = parse_number<int>(key, value);
  } else if (key == "toy.min_frames") {
    toy.min_frames = parse_number<int>(key, value);
  } else if (key == "toy.max_frames") {
    toy.max_frames = parse_number<int>(key, value);
  } else if (key == "toy.joints") {
    toy.joints = parse_number<int>(key, value);
  } else if (key == "toy.crossfade") {
    toy.crossfade = parse_number<int>(key, value);
  } else if (key == "toy.seed") {
    toy.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "toy.gloss_order") {
    if (value != "reversed" && value != "identity") {
      throw ConfigError("toy.gloss_order must be reversed or identity; got '" + value + "'");
    }
    toy.identity_gloss = value == "identity";
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key=value, got '" + t + "'");
    }
    try {
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    } catch (const ParameterError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "task=" << task_name(task) << '\n'
    << "data.dir=" << data_dir << '\n'
    << "data.normalize=" << (normalize ? "true" : "false") << '\n'
    << "model.layers=" << model.num_layers << '\n'
    << "model.heads=" << model.num_heads << '\n'
    << "model.d_model=" << model.d_model << '\n'
    << "model.d_ff=" << model.d_ff << '\n'
    << "model.d_counter=" << d_counter << '\n'
    << "model.max_seq_len=" << model.max_seq_len << '\n'
    << "train.lr=" << num(train.learning_rate) << '\n'
    << "train.batch_size=" << train.batch_size << '\n'
    << "train.epochs=" << train.epochs << '\n'
    << "train.patience=" << train.patience << '\n'
    << "train.eval_every=" << train.eval_every << '\n'
    << "train.seed=" << train.seed << '\n'
    << "eval.backtranslation=" << eval.backtranslation << '\n'
    << "eval.mode=" << mode_name(eval.mode) << '\n'
    << "eval.stop_threshold=" << num(eval.stop_threshold) << '\n'
    << "eval.max_frames=" << eval.max_frames << '\n'
    << "eval.max_tokens=" << eval.max_tokens << '\n'
    << "augment.future_prediction=" << (augment.future_prediction ? "true" : "false") << '\n'
    << "augment.future_horizon=" << augment.future_horizon << '\n'
    << "augment.just_counter=" << (augment.just_counter ? "true" : "false") << '\n'
    << "augment.gaussian_noise=" << (augment.gaussian_noise ? "true" : "false") << '\n'
    << "augment.noise_factor=" << num(augment.noise_factor) << '\n'
    << "augment.noise_source=" << noise_source_name(augment.noise_source) << '\n'
    << "toy.vocab_size=" << toy.vocab_size << '\n'
    << "toy.train=" << toy.train << '\n'
    << "toy.dev=" << toy.dev << '\n'
    << "toy.test=" << toy.test << '\n'
    << "toy.min_tokens=" << toy.min_tokens << '\n'
    << "toy.max_tokens=" << toy.max_tokens << '\n'
    << "toy.min_frames=" << toy.min_frames << '\n'
    << "toy.max_frames=" << toy.max_frames << '\n'
    << "toy.joints=" << toy.joints << '\n'
    << "toy.crossfade=" << toy.crossfade << '\n'
    << "toy.seed=" << toy.seed << '\n'
    << "toy.gloss_order=" << (toy.identity_gloss ? "identity" : "reversed") << '\n';
  return o.str();
}

void RunConfig::validate() const {
  try {
    model.validate();
    augment.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (d_counter <= 0 || d_counter >= model.d_model) throw ConfigError("model.d_counter must lie in [1, d_model - 1]");
  if (!(train.learning_rate >= 0.0)) throw ConfigError("train.lr must be non-negative");
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
  if (train.epochs < 0) throw ConfigError("train.epochs must be non-negative");
  if (train.patience < 1) throw ConfigError("train.patience must be at least 1");
  if (train.eval_every < 1) throw ConfigError("train.eval_every must be at least 1");
  if (!(eval.stop_threshold > 0.0 && eval.stop_threshold <= 1.0)) {
    throw ConfigError("eval.stop_threshold must lie in (0, 1]");
  }
  if (eval.max_frames < 0 || eval.max_tokens < 0) throw ConfigError("eval limits must be non-negative");
  if (augment.just_counter && augment.gaussian_noise) {
    throw ConfigError("augment.gaussian_noise has no effect with augment.just_counter");
  }
}

ProgressiveConfig RunConfig::progressive(int joints) const {
  ProgressiveConfig p;
  p.model = model;
  p.joints = joints;
  p.d_counter = d_counter;
  p.future_horizon = augment.effective_horizon();
  p.just_counter = augment.just_counter;
  return p;
}

}  // namespace sf
