// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "signforge/augmentation.hpp"
#include "signforge/errors.hpp"

namespace sf {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kDefaultMaxFrames = 200;
constexpr std::size_t kDefaultMaxTokens = 64;

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

ModelBundle::ModelBundle(const RunConfig& cfg, Vocabulary source, Vocabulary target, int joints)
    : cfg_(cfg), source_(std::move(source)), target_(std::move(target)), joints_(joints) {
  cfg_.validate();
  const std::uint64_t seed = cfg_.train.seed;
  switch (cfg_.task) {
    case Task::kTextToGloss:
      symbolic_ = std::make_unique<SymbolicTransformer>(cfg_.model, source_.size(), target_.size(), seed);
      break;
    case Task::kGlossToPose:
    case Task::kTextToPose:
      progressive_ = std::make_unique<ProgressiveTransformer>(cfg_.progressive(joints_), source_.size(), seed);
      break;
    case Task::kPoseToText:
      pose_to_text_ =
          std::make_unique<PoseToTextTransformer>(cfg_.model, cfg_.d_counter, joints_, target_.size(), seed);
      break;
  }
}

ParameterStore& ModelBundle::parameters() {
  if (symbolic_) return symbolic_->parameters();
  if (progressive_) return progressive_->parameters();
  return pose_to_text_->parameters();
}

const ParameterStore& ModelBundle::parameters() const {
  if (symbolic_) return symbolic_->parameters();
  if (progressive_) return progressive_->parameters();
  return pose_to_text_->parameters();
}

Checkpoint ModelBundle::checkpoint(const AdamState* adam, std::uint64_t epoch, std::uint64_t step,
                                   const Rng* rng) const {
  Checkpoint c;
  c.config_text = cfg_.to_text();
  c.source_vocab = source_.tokens();
  c.target_vocab = target_.tokens();
  c.joints = static_cast<std::uint32_t>(joints_);
  c.epoch = epoch;
  c.step = step;
  if (rng) c.rng_state = rng->state();
  capture_parameters(c, parameters(), adam);
  return c;
}

std::unique_ptr<ModelBundle> ModelBundle::from_checkpoint(const Checkpoint& ckpt, AdamState* adam) {
  RunConfig cfg;
  Vocabulary source;
  Vocabulary target;
  try {
    cfg = RunConfig::parse(ckpt.config_text, "checkpoint config");
    source = Vocabulary::from_tokens(ckpt.source_vocab);
    target = Vocabulary::from_tokens(ckpt.target_vocab);
  } catch (const Error& e) {
    throw LoadError(std::string("checkpoint metadata is invalid: ") + e.what());
  }
  auto bundle = std::make_unique<ModelBundle>(cfg, std::move(source), std::move(target),
                                              static_cast<int>(ckpt.joints));
  restore_parameters(ckpt, bundle->parameters(), adam);
  return bundle;
}

std::unique_ptr<ModelBundle> ModelBundle::load(const std::string& path) {
  return from_checkpoint(load_checkpoint(path));
}

std::vector<int> ModelBundle::encode_source(const ParallelSample& sample) const {
  if (cfg_.task == Task::kGlossToPose) {
    if (!sample.gloss) throw LoadError("sample '" + sample.id + "' has no gloss");
    return source_.encode(*sample.gloss);
  }
  if (cfg_.task == Task::kPoseToText) throw ParameterError("p2t models take poses, not tokens");
  return source_.encode(sample.text);
}

std::vector<int> ModelBundle::encode_target(const ParallelSample& sample) const {
  if (cfg_.task == Task::kTextToGloss) {
    if (!sample.gloss) throw LoadError("sample '" + sample.id + "' has no gloss");
    return target_.encode(*sample.gloss);
  }
  if (cfg_.task == Task::kPoseToText) return target_.encode(sample.text);
  throw ParameterError("production models have no token targets");
}

std::size_t ModelBundle::max_frames() const {
  return cfg_.eval.max_frames > 0 ? static_cast<std::size_t>(cfg_.eval.max_frames) : kDefaultMaxFrames;
}

std::size_t ModelBundle::max_tokens() const {
  return cfg_.eval.max_tokens > 0 ? static_cast<std::size_t>(cfg_.eval.max_tokens) : kDefaultMaxTokens;
}

std::string ModelBundle::describe() const {
  const ModelConfig& m = cfg_.model;
  std::string s = "task=" + task_name(cfg_.task) + " params=" + std::to_string(parameters().scalar_count()) +
                  " tensors=" + std::to_string(parameters().entries().size()) +
                  " layers=" + std::to_string(m.num_layers) + " heads=" + std::to_string(m.num_heads) +
                  " d_model=" + std::to_string(m.d_model) + " d_ff=" + std::to_string(m.ff_width()) +
                  " source_vocab=" + std::to_string(source_.size()) +
                  " target_vocab=" + std::to_string(target_.size()) + " joints=" + std::to_string(joints_);
  if (progressive_) {
    const ProgressiveConfig& p = progressive_->config();
    s += " d_counter=" + std::to_string(p.d_counter) + " horizon=" + std::to_string(p.future_horizon) +
         " just_counter=" + (p.just_counter ? "true" : "false");
  }
  return s;
}

// ---------------------------------------------------------------------------

std::vector<ParallelSample> load_corpus_split(const RunConfig& cfg, const std::string& dir,
                                              const std::string& split) {
  std::vector<ParallelSample> samples = load_split(dir, split);
  if (cfg.normalize) {
    const RigDescription rig = read_rig((fs::path(dir) / "rig.cfg").string());
    for (auto& s : samples) s.pose = normalize_skeleton(s.pose, rig);
  }
  return samples;
}

double production_mse(const PoseSequence& produced, const PoseSequence& reference) {
  if (produced.width() != reference.width()) throw ParameterError("production and reference differ in joints");
  if (produced.length() == 0 || reference.length() == 0) throw ParameterError("cannot compare empty sequences");
  const std::size_t len = std::max(produced.length(), reference.length());
  const std::size_t w = produced.width();
  double sum = 0.0;
  for (std::size_t u = 0; u < len; ++u) {
    const auto a = produced.frame(std::min(u, produced.length() - 1));
    const auto b = reference.frame(std::min(u, reference.length() - 1));
    for (std::size_t c = 0; c < w; ++c) {
      const double d = static_cast<double>(a[c]) - static_cast<double>(b[c]);
      sum += d * d;
    }
  }
  return sum / static_cast<double>(len * w);
}

namespace {

std::vector<std::vector<std::size_t>> chunks_by_length(const std::vector<std::size_t>& lengths, std::size_t size) {
  return batchify(lengths, std::max<std::size_t>(size, 1), nullptr);
}

std::vector<PoseSequence> run_progressive(const ModelBundle& model, const std::vector<std::vector<int>>& sources,
                                          const std::vector<ParallelSample>& samples, ProductionMode mode,
                                          std::size_t max_frames, double stop_threshold) {
  ProductionOptions opt;
  opt.mode = mode;
  opt.max_frames = max_frames > 0 ? max_frames : model.max_frames();
  opt.stop_threshold = stop_threshold > 0.0 ? stop_threshold : model.config().eval.stop_threshold;
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    lengths.push_back(mode == ProductionMode::kCounterDriven ? samples[i].pose.length() : sources[i].size());
  }
  std::vector<PoseSequence> out(samples.size());
  for (const auto& chunk : chunks_by_length(lengths, static_cast<std::size_t>(model.config().train.batch_size))) {
    std::vector<std::vector<int>> src;
    std::vector<std::vector<Real>> counters;
    for (std::size_t i : chunk) {
      src.push_back(sources[i]);
      if (mode == ProductionMode::kCounterDriven) counters.push_back(counter_schedule(samples[i].pose.length()));
    }
    std::vector<PoseSequence> produced =
        model.progressive()->produce(src, opt, mode == ProductionMode::kCounterDriven ? &counters : nullptr);
    for (std::size_t k = 0; k < chunk.size(); ++k) out[chunk[k]] = std::move(produced[k]);
  }
  return out;
}

}  // namespace

std::vector<TokenSeq> translate_tokens(const ModelBundle& t2g, const std::vector<TokenSeq>& sources) {
  if (t2g.task() != Task::kTextToGloss) throw ParameterError("translation needs a t2g checkpoint");
  std::vector<std::size_t> lengths;
  for (const auto& s : sources) {
    if (s.empty()) throw ParameterError("cannot translate an empty input line");
    lengths.push_back(s.size());
  }
  std::vector<TokenSeq> out(sources.size());
  for (const auto& chunk : chunks_by_length(lengths, static_cast<std::size_t>(t2g.config().train.batch_size))) {
    std::vector<std::vector<int>> src;
    for (std::size_t i : chunk) src.push_back(t2g.source_vocab().encode(sources[i]));
    const auto ids = t2g.symbolic()->translate_batch(src, t2g.max_tokens());
    for (std::size_t k = 0; k < chunk.size(); ++k) out[chunk[k]] = t2g.target_vocab().decode(ids[k]);
  }
  return out;
}

std::vector<PoseSequence> produce_poses(const ModelBundle& primary, const ModelBundle* g2p,
                                        const std::vector<ParallelSample>& samples, ProductionMode mode,
                                        std::size_t max_frames, double stop_threshold) {
  if (samples.empty()) throw ParameterError("nothing to produce");
  for (const auto& s : samples) {
    if (s.text.empty()) throw ParameterError("sample '" + s.id + "' has an empty input line");
  }
  if (primary.task() == Task::kTextToGloss) {
    if (!g2p) throw ParameterError("T2G2P production requires a g2p checkpoint");
    if (g2p->task() != Task::kGlossToPose) throw ParameterError("second checkpoint is not a g2p model");
    std::vector<TokenSeq> texts;
    for (const auto& s : samples) texts.push_back(s.text);
    const std::vector<TokenSeq> glosses = translate_tokens(primary, texts);
    std::vector<std::vector<int>> sources;
    for (const auto& g : glosses) sources.push_back(g2p->source_vocab().encode(g));
    return run_progressive(*g2p, sources, samples, mode, max_frames, stop_threshold);
  }
  if (g2p) throw ParameterError("a g2p checkpoint is only used together with a t2g checkpoint");
  if (!is_production_task(primary.task())) {
    throw ParameterError("T2P production requires a t2p (or g2p) checkpoint, got " + task_name(primary.task()));
  }
  std::vector<std::vector<int>> sources;
  for (const auto& s : samples) sources.push_back(primary.encode_source(s));
  return run_progressive(primary, sources, samples, mode, max_frames, stop_threshold);
}

std::vector<TokenSeq> back_translate(const ModelBundle& p2t, const std::vector<PoseSequence>& poses) {
  if (p2t.task() != Task::kPoseToText) throw ParameterError("back-translation needs a p2t checkpoint");
  std::vector<std::size_t> lengths;
  for (const auto& p : poses) {
    if (static_cast<int>(p.joints) != p2t.joints()) {
      throw ParameterError("production has " + std::to_string(p.joints) + " joints but the p2t model expects " +
                           std::to_string(p2t.joints()));
    }
    lengths.push_back(p.length());
  }
  std::vector<TokenSeq> out(poses.size());
  for (const auto& chunk : chunks_by_length(lengths, static_cast<std::size_t>(p2t.config().train.batch_size))) {
    std::vector<const PoseSequence*> batch;
    for (std::size_t i : chunk) batch.push_back(&poses[i]);
    const auto ids = p2t.pose_to_text()->translate_batch(batch, p2t.max_tokens());
    for (std::size_t k = 0; k < chunk.size(); ++k) out[chunk[k]] = p2t.target_vocab().decode(ids[k]);
  }
  return out;
}

EvaluationReport evaluate_productions(const ModelBundle& p2t, const std::vector<PoseSequence>& productions,
                                      const std::vector<ParallelSample>& references) {
  if (productions.empty()) throw ParameterError("no productions to evaluate");
  if (productions.size() != references.size()) throw ParameterError("productions and references differ in count");
  const std::vector<TokenSeq> hyps = back_translate(p2t, productions);
  std::vector<TokenSeq> refs;
  double dtw = 0.0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    refs.push_back(references[i].text);
    dtw += dtw_align(productions[i], references[i].pose).normalized_cost;
  }
  EvaluationReport r = score_translations(hyps, refs);
  r.dtw_mean = dtw / static_cast<double>(references.size());
  return r;
}

void write_productions(const std::string& out_dir, const std::string& split,
                       const std::vector<ParallelSample>& samples, const std::vector<PoseSequence>& poses) {
  if (samples.size() != poses.size()) throw ParameterError("productions and samples differ in count");
  std::vector<ParallelSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ParallelSample s;
    s.id = samples[i].id;
    s.text = samples[i].text;
    s.pose = poses[i];
    out.push_back(std::move(s));
  }
  write_split(out_dir, split, out);
}

std::vector<PoseSequence> read_productions(const std::string& dir, const std::string& split,
                                           const std::vector<ParallelSample>& references,
                                           std::vector<ParallelSample>* matched) {
  const fs::path ids_path = fs::path(dir) / (split + ".ids");
  if (!fs::exists(ids_path)) throw ParameterError("production directory " + dir + " has no " + split + ".ids");
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < references.size(); ++i) by_id[references[i].id] = i;
  std::ifstream in(ids_path, std::ios::binary);
  std::vector<PoseSequence> poses;
  std::string line;
  while (std::getline(in, line)) {
    const TokenSeq t = tokenize(line);
    if (t.empty()) continue;
    const auto it = by_id.find(t.front());
    if (it == by_id.end()) throw LoadError("production '" + t.front() + "' has no reference sample");
    poses.push_back(read_pose_file((fs::path(dir) / "pose" / (t.front() + ".pose3")).string()));
    if (matched) matched->push_back(references[it->second]);
  }
  if (poses.empty()) throw ParameterError("production directory " + dir + " is empty");
  return poses;
}

// ---------------------------------------------------------------------------

namespace {

double token_accuracy_on(const ModelBundle& m, const std::vector<ParallelSample>& dev) {
  NoGradGuard no_grad;
  const auto bs = static_cast<std::size_t>(m.config().train.batch_size);
  double correct = 0.0;
  double total = 0.0;
  for (std::size_t start = 0; start < dev.size(); start += bs) {
    const std::size_t end = std::min(dev.size(), start + bs);
    std::vector<std::vector<int>> targets;
    for (std::size_t i = start; i < end; ++i) targets.push_back(m.encode_target(dev[i]));
    Tensor logits;
    std::vector<int> target_out;
    if (m.symbolic()) {
      std::vector<std::vector<int>> sources;
      for (std::size_t i = start; i < end; ++i) sources.push_back(m.encode_source(dev[i]));
      const SymbolicBatch b = make_symbolic_batch(sources, targets);
      logits = m.symbolic()->logits(b);
      target_out = b.target_out;
    } else {
      std::vector<const PoseSequence*> poses;
      for (std::size_t i = start; i < end; ++i) poses.push_back(&dev[i].pose);
      const PoseTextBatch b = make_pose_text_batch(poses, targets);
      logits = m.pose_to_text()->logits(b);
      target_out = b.target_out;
    }
    const double n = static_cast<double>(
        std::count_if(target_out.begin(), target_out.end(), [](int id) { return id != Vocabulary::kPad; }));
    correct += token_accuracy(logits, target_out) * n;
    total += n;
  }
  return total == 0.0 ? 0.0 : correct / total;
}

void check_corpus_for(const RunConfig& cfg, const std::vector<ParallelSample>& samples, const char* split,
                      std::size_t joints) {
  const bool needs_gloss = cfg.task == Task::kTextToGloss || cfg.task == Task::kGlossToPose;
  for (const auto& s : samples) {
    if (needs_gloss && !s.gloss) {
      throw LoadError(std::string(split) + " sample '" + s.id + "' has no gloss, which task " +
                      task_name(cfg.task) + " requires");
    }
    if (s.pose.joints != joints) {
      throw LoadError(std::string(split) + " sample '" + s.id + "' has " + std::to_string(s.pose.joints) +
                      " joints, expected " + std::to_string(joints));
    }
  }
}

}  // namespace

TrainSummary train_model(const RunConfig& cfg_in, const std::vector<ParallelSample>& train,
                         const std::vector<ParallelSample>& dev, const std::string& out_dir,
                         std::ostream* progress) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  if (train.empty()) throw ParameterError("training split is empty");
  if (dev.empty()) throw ParameterError("dev split is empty");
  const Task task = cfg.task;
  const bool production = is_production_task(task);
  const AugmentationConfig& aug = cfg.augment;
  if (!production && (aug.future_prediction || aug.just_counter || aug.gaussian_noise)) {
    throw ConfigError("augmentation applies only to g2p and t2p tasks");
  }
  const std::size_t joints = train.front().pose.joints;
  check_corpus_for(cfg, train, "train", joints);
  check_corpus_for(cfg, dev, "dev", joints);

  std::vector<TokenSeq> texts;
  std::vector<TokenSeq> glosses;
  std::size_t longest_pose = 0;
  std::size_t longest_target = 0;
  for (const auto& s : train) {
    texts.push_back(s.text);
    if (s.gloss) glosses.push_back(*s.gloss);
    longest_pose = std::max(longest_pose, s.pose.length());
    longest_target = std::max(longest_target, task == Task::kTextToGloss && s.gloss ? s.gloss->size() : s.text.size());
  }
  Vocabulary source;
  Vocabulary target;
  switch (task) {
    case Task::kTextToGloss:
      source = Vocabulary::build(texts);
      target = Vocabulary::build(glosses);
      break;
    case Task::kGlossToPose: source = Vocabulary::build(glosses); break;
    case Task::kTextToPose: source = Vocabulary::build(texts); break;
    case Task::kPoseToText: target = Vocabulary::build(texts); break;
  }
  if (cfg.eval.max_frames == 0) cfg.eval.max_frames = static_cast<int>(2 * longest_pose);
  if (cfg.eval.max_tokens == 0) cfg.eval.max_tokens = static_cast<int>(2 * longest_target + 2);
  const std::size_t longest_dev =
      std::max_element(dev.begin(), dev.end(), [](const ParallelSample& a, const ParallelSample& b) {
        return a.pose.length() < b.pose.length();
      })->pose.length();
  if (production || task == Task::kPoseToText) {
    const std::size_t need = std::max({static_cast<std::size_t>(cfg.eval.max_frames), longest_pose, longest_dev});
    if (need > static_cast<std::size_t>(cfg.model.max_seq_len)) {
      throw ConfigError("model.max_seq_len " + std::to_string(cfg.model.max_seq_len) + " is below the " +
                        std::to_string(need) + " frames the corpus and eval.max_frames need");
    }
  }

  auto model = std::make_unique<ModelBundle>(cfg, std::move(source), std::move(target), static_cast<int>(joints));
  std::unique_ptr<ModelBundle> p2t;
  if (production && !cfg.eval.backtranslation.empty()) {
    p2t = ModelBundle::load(cfg.eval.backtranslation);
    if (p2t->task() != Task::kPoseToText) throw ConfigError("eval.backtranslation is not a p2t checkpoint");
    if (p2t->joints() != static_cast<int>(joints)) {
      throw ConfigError("eval.backtranslation model expects " + std::to_string(p2t->joints()) + " joints");
    }
  }

  std::string metric = "dev_accuracy";
  if (production) {
    metric = p2t ? "dev_bleu4" : cfg.eval.mode == ProductionMode::kFreeRunning ? "dev_free_mse" : "dev_counter_mse";
  }
  const bool higher_better = !production || p2t;

  AdamState adam;
  adam.learning_rate = cfg.train.learning_rate;
  Rng data_rng(cfg.train.seed ^ 0x5DEECE66Dull);
  Rng noise_rng(cfg.train.seed ^ 0xB5297A4D3F84D5B5ull);
  const int horizon = cfg.augment.effective_horizon();
  const std::size_t width = 3 * joints;

  std::vector<std::size_t> lengths;
  std::vector<std::vector<int>> train_src;
  std::vector<std::vector<int>> train_tgt;
  for (const auto& s : train) {
    lengths.push_back(production || task == Task::kPoseToText ? s.pose.length() : s.text.size());
    if (task != Task::kPoseToText) train_src.push_back(model->encode_source(s));
    if (!production) train_tgt.push_back(model->encode_target(s));
  }

  JointStats noise_stats;
  JointStats positional_stats;
  if (production && aug.gaussian_noise && aug.noise_source == NoiseSource::kPositional) {
    JointStatsAccumulator acc(width);
    for (const auto& s : train) {
      for (std::size_t u = 0; u < s.pose.length(); ++u) acc.add(s.pose.frame(u));
    }
    positional_stats = acc.finish(0);
  }

  std::string log;
  auto emit = [&](const std::string& line) {
    log += line;
    log += '\n';
    if (progress) *progress << line << '\n' << std::flush;
  };
  emit("# task=" + task_name(task) + " seed=" + std::to_string(cfg.train.seed) +
       " train=" + std::to_string(train.size()) + " dev=" + std::to_string(dev.size()) +
       " params=" + std::to_string(model->parameters().scalar_count()) + " metric=" + metric);

  auto evaluate_dev = [&]() -> double {
    if (!production) return token_accuracy_on(*model, dev);
    const std::vector<PoseSequence> produced =
        produce_poses(*model, nullptr, dev, cfg.eval.mode, 0, cfg.eval.stop_threshold);
    if (p2t) return evaluate_productions(*p2t, produced, dev).bleu[3];
    double sum = 0.0;
    for (std::size_t i = 0; i < dev.size(); ++i) sum += production_mse(produced[i], dev[i].pose);
    return sum / static_cast<double>(dev.size());
  };

  TrainSummary summary;
  summary.metric_name = metric;
  Checkpoint best_ckpt;
  bool have_best = false;
  int stale = 0;
  std::uint64_t step = 0;
  const auto batch_size = static_cast<std::size_t>(cfg.train.batch_size);

  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto batches = batchify(lengths, batch_size, &data_rng);
    JointStatsAccumulator residuals(width);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    const JointStats& applied = aug.noise_source == NoiseSource::kPositional
                                    ? (epoch > 1 ? positional_stats : noise_stats)
                                    : noise_stats;
    const bool noisy = production && aug.gaussian_noise && !applied.empty();
    for (const auto& idx : batches) {
      model->parameters().zero_grad();
      Tensor loss;
      if (task == Task::kTextToGloss) {
        std::vector<std::vector<int>> src;
        std::vector<std::vector<int>> tgt;
        for (std::size_t i : idx) {
          src.push_back(train_src[i]);
          tgt.push_back(train_tgt[i]);
        }
        loss = model->symbolic()->loss(make_symbolic_batch(src, tgt));
      } else if (task == Task::kPoseToText) {
        std::vector<const PoseSequence*> poses;
        std::vector<std::vector<int>> tgt;
        for (std::size_t i : idx) {
          poses.push_back(&train[i].pose);
          tgt.push_back(train_tgt[i]);
        }
        loss = model->pose_to_text()->loss(make_pose_text_batch(poses, tgt));
      } else {
        std::vector<std::vector<int>> src;
        std::vector<const PoseSequence*> poses;
        for (std::size_t i : idx) {
          src.push_back(train_src[i]);
          poses.push_back(&train[i].pose);
        }
        ProgressiveBatch b = make_progressive_batch(src, poses, horizon);
        if (noisy) gaussian_noise_augment(b, applied, aug.noise_factor, noise_rng);
        const Tensor pred = model->progressive()->forward(b);
        loss = mse_loss(pred, Tensor({b.batch, b.frames, b.target_width}, b.targets), b.valid);
        if (aug.gaussian_noise && aug.noise_source == NoiseSource::kResidual) {
          std::vector<Real> r(width);
          for (std::size_t row = 0; row < b.batch * b.frames; ++row) {
            if (!b.valid[row]) continue;
            for (std::size_t c = 0; c < width; ++c) {
              r[c] = pred[row * b.target_width + c] - b.targets[row * b.target_width + c];
            }
            residuals.add(r);
          }
        }
      }
      loss.backward();
      adam_step(model->parameters(), adam);
      ++step;
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(idx.size());
      seen += idx.size();
    }
    double noise_scale = 0.0;
    if (noisy) {
      for (double s : applied.stddev) noise_scale += s;
      noise_scale = aug.noise_factor * noise_scale / static_cast<double>(applied.stddev.size());
    }
    if (aug.gaussian_noise && aug.noise_source == NoiseSource::kResidual && residuals.count() > 0) {
      noise_stats = residuals.finish(epoch);
    }

    std::string line = "epoch=" + std::to_string(epoch) + " step=" + std::to_string(step) +
                       " loss=" + fmt("%.8g", loss_sum / static_cast<double>(seen));
    if (production && aug.gaussian_noise) line += " noise_scale=" + fmt("%.8g", noise_scale);
    summary.epochs_run = static_cast<std::size_t>(epoch);
    if (epoch % cfg.train.eval_every == 0 || epoch == cfg.train.epochs) {
      const double value = evaluate_dev();
      const bool improved =
          !have_best || (higher_better ? value > summary.best_metric : value < summary.best_metric);
      line += " " + metric + "=" + fmt("%.8g", value);
      if (improved) {
        summary.best_metric = value;
        summary.best_epoch = static_cast<std::size_t>(epoch);
        best_ckpt = model->checkpoint(&adam, static_cast<std::uint64_t>(epoch), step, &data_rng);
        have_best = true;
        stale = 0;
        line += " best";
      } else {
        ++stale;
      }
      emit(line);
      if (stale >= cfg.train.patience) {
        emit("# early stop after " + std::to_string(stale) + " evaluations without improvement");
        break;
      }
    } else {
      emit(line);
    }
  }
  if (!have_best) {
    summary.best_metric = evaluate_dev();
    best_ckpt = model->checkpoint(&adam, 0, step, &data_rng);
  }
  emit("best_epoch=" + std::to_string(summary.best_epoch) + " " + metric + "=" + fmt("%.8g", summary.best_metric));
  summary.log = log;
  summary.best = ModelBundle::from_checkpoint(best_ckpt);
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    save_checkpoint((fs::path(out_dir) / "model.ckpt").string(), best_ckpt);
    std::ofstream out(fs::path(out_dir) / "train.log", std::ios::binary);
    if (!out) throw IoError("cannot write " + (fs::path(out_dir) / "train.log").string());
    out << log;
  }
  return summary;
}

TrainSummary train_model(const RunConfig& cfg, const std::string& out_dir, std::ostream* progress) {
  if (cfg.data_dir.empty()) throw ConfigError("data.dir is not set");
  const auto train = load_corpus_split(cfg, cfg.data_dir, "train");
  const auto dev = load_corpus_split(cfg, cfg.data_dir, "dev");
  return train_model(cfg, train, dev, out_dir, progress);
}

}  // namespace sf
