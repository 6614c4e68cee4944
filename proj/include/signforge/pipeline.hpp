// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "signforge/checkpoint.hpp"
#include "signforge/config.hpp"
#include "signforge/corpus.hpp"
#include "signforge/metrics.hpp"
#include "signforge/pose_to_text.hpp"
#include "signforge/progressive.hpp"
#include "signforge/symbolic.hpp"
#include "signforge/vocabulary.hpp"

namespace sf {

// One trained model of any task together with its vocabularies and run
// configuration.
class ModelBundle {
 public:
  ModelBundle(const RunConfig& cfg, Vocabulary source, Vocabulary target, int joints);
  static std::unique_ptr<ModelBundle> from_checkpoint(const Checkpoint& ckpt, AdamState* adam = nullptr);
  static std::unique_ptr<ModelBundle> load(const std::string& path);

  Checkpoint checkpoint(const AdamState* adam = nullptr, std::uint64_t epoch = 0, std::uint64_t step = 0,
                        const Rng* rng = nullptr) const;
  void save(const std::string& path) const { save_checkpoint(path, checkpoint()); }

  Task task() const { return cfg_.task; }
  const RunConfig& config() const { return cfg_; }
  const Vocabulary& source_vocab() const { return source_; }
  const Vocabulary& target_vocab() const { return target_; }
  int joints() const { return joints_; }
  ParameterStore& parameters();
  const ParameterStore& parameters() const;

  SymbolicTransformer* symbolic() const { return symbolic_.get(); }
  ProgressiveTransformer* progressive() const { return progressive_.get(); }
  PoseToTextTransformer* pose_to_text() const { return pose_to_text_.get(); }

  // Source tokens of the sample for this task (text, or gloss for g2p).
  std::vector<int> encode_source(const ParallelSample& sample) const;
  // Target tokens (gloss for t2g, text for p2t).
  std::vector<int> encode_target(const ParallelSample& sample) const;

  std::size_t max_frames() const;
  std::size_t max_tokens() const;
  std::string describe() const;

 private:
  RunConfig cfg_;
  Vocabulary source_;
  Vocabulary target_;
  int joints_;
  std::unique_ptr<SymbolicTransformer> symbolic_;
  std::unique_ptr<ProgressiveTransformer> progressive_;
  std::unique_ptr<PoseToTextTransformer> pose_to_text_;
};

struct TrainSummary {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::string metric_name;
  std::string log;
  std::unique_ptr<ModelBundle> best;
};

// Teacher-forced training with per-epoch dev evaluation. The dev metric is
// token accuracy for t2g and p2t, back-translation BLEU-4 for g2p and t2p
// when eval.backtranslation names a p2t checkpoint, and otherwise the dev
// production MSE under eval.mode. When `out_dir` is non-empty the best model
// is written to `<out_dir>/model.ckpt` and the log to `<out_dir>/train.log`.
TrainSummary train_model(const RunConfig& cfg, const std::vector<ParallelSample>& train,
                         const std::vector<ParallelSample>& dev, const std::string& out_dir,
                         std::ostream* progress = nullptr);
// Loads train and dev splits from cfg.data_dir.
TrainSummary train_model(const RunConfig& cfg, const std::string& out_dir, std::ostream* progress = nullptr);

// Reads `<dir>/rig.cfg` and normalizes every pose when cfg.normalize is set.
std::vector<ParallelSample> load_corpus_split(const RunConfig& cfg, const std::string& dir, const std::string& split);

// Mean squared joint error between a production and its reference; the
// shorter sequence is extended by repeating its last frame.
double production_mse(const PoseSequence& produced, const PoseSequence& reference);

// T2P: primary is a t2p (or g2p, reading gloss) model and g2p is null.
// T2G2P: primary is a t2g model and g2p the pose model. Counter-driven mode
// takes its timing from the reference poses of the samples.
std::vector<PoseSequence> produce_poses(const ModelBundle& primary, const ModelBundle* g2p,
                                        const std::vector<ParallelSample>& samples, ProductionMode mode,
                                        std::size_t max_frames = 0, double stop_threshold = 0.0);

std::vector<TokenSeq> translate_tokens(const ModelBundle& t2g, const std::vector<TokenSeq>& sources);
std::vector<TokenSeq> back_translate(const ModelBundle& p2t, const std::vector<PoseSequence>& poses);

// Back-translation scores against the sample text plus mean normalized DTW
// cost against the sample poses.
EvaluationReport evaluate_productions(const ModelBundle& p2t, const std::vector<PoseSequence>& productions,
                                      const std::vector<ParallelSample>& references);

// Writes `<out_dir>/<split>.ids`, `<split>.text` and `pose/<id>.pose3`.
void write_productions(const std::string& out_dir, const std::string& split,
                       const std::vector<ParallelSample>& samples, const std::vector<PoseSequence>& poses);
// Reads productions written by write_productions, matched to `references`
// by id. Every production id must exist among the references.
std::vector<PoseSequence> read_productions(const std::string& dir, const std::string& split,
                                           const std::vector<ParallelSample>& references,
                                           std::vector<ParallelSample>* matched);

}  // namespace sf
