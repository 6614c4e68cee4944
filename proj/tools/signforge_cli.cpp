// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Uses only the C interface.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "signforge/signforge.h"

namespace {

struct Failure {
  sf_status status;
  std::string message;
};

void check(sf_status s) {
  if (s != SF_OK) throw Failure{s, sf_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{SF_ERR_IO, "cannot read " + path};
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Owns an sf_model handle.
class Model {
 public:
  explicit Model(const std::string& path) { check(sf_model_load(path.c_str(), &handle_)); }
  ~Model() { sf_model_free(handle_); }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  const sf_model* get() const { return handle_; }

 private:
  sf_model* handle_ = nullptr;
};

std::string take(char* s) {
  std::string out = s ? s : "";
  sf_string_free(s);
  return out;
}

// Command-line flags override keys of the configuration file, so they are
// appended after it.
std::string compose_config(const std::string& path, const std::string& task, const std::string& mode, long long seed,
                           const std::string& data, bool toy_seed) {
  std::string text = path.empty() ? "" : read_file(path);
  if (!text.empty() && text.back() != '\n') text += '\n';
  if (!task.empty()) text += "task=" + task + "\n";
  if (!mode.empty()) text += "eval.mode=" + mode + "\n";
  if (!data.empty()) text += "data.dir=" + data + "\n";
  if (seed >= 0) text += (toy_seed ? "toy.seed=" : "train.seed=") + std::to_string(seed) + "\n";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signforge: text, gloss and pose sequence-to-sequence toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sf_version()));

  std::string config_path, task, mode, out_dir, data_dir, split = "dev", model_path, g2p_path, input_path;
  std::string productions_dir, pose_a, pose_b;
  long long seed = -1;
  std::size_t max_frames = 0;

  const std::vector<std::string> tasks = {"t2g", "g2p", "t2p", "p2t"};
  const std::vector<std::string> modes = {"free", "counter-driven"};

  auto* synth = app.add_subcommand("synth-data", "Write a synthetic toy corpus");
  synth->add_option("--config", config_path, "Configuration file (toy.* keys)")->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "Corpus seed (overrides toy.seed)");
  synth->add_option("--out", out_dir, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  train->add_option("--task", task, "Task")->check(CLI::IsMember(tasks));
  train->add_option("--mode", mode, "Production mode used for dev evaluation")->check(CLI::IsMember(modes));
  train->add_option("--seed", seed, "Training seed (overrides train.seed)");
  train->add_option("--data", data_dir, "Corpus directory (overrides data.dir)");
  train->add_option("--out", out_dir, "Output directory")->required();

  auto* translate = app.add_subcommand("translate", "Translate text to gloss with a t2g checkpoint");
  translate->add_option("--model", model_path, "t2g checkpoint")->required()->check(CLI::ExistingFile);
  translate->add_option("--input", input_path, "Input file, one sentence per line (default: stdin)");

  auto* produce = app.add_subcommand("produce", "Produce pose sequences (T2P or T2G2P)");
  produce->add_option("--model", model_path, "t2p, g2p or t2g checkpoint")->required()->check(CLI::ExistingFile);
  produce->add_option("--g2p", g2p_path, "g2p checkpoint for T2G2P")->check(CLI::ExistingFile);
  produce->add_option("--data", data_dir, "Corpus directory")->required();
  produce->add_option("--split", split, "Split to produce")->capture_default_str();
  produce->add_option("--mode", mode, "Production mode")->check(CLI::IsMember(modes))->required();
  produce->add_option("--max-frames", max_frames, "Frame budget for free running (0: model default)");
  produce->add_option("--out", out_dir, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Back-translate productions and score them");
  evaluate->add_option("--productions", productions_dir, "Production directory")->required();
  evaluate->add_option("--model", model_path, "p2t checkpoint")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data_dir, "Reference corpus directory")->required();
  evaluate->add_option("--split", split, "Split to evaluate")->capture_default_str();

  auto* dtw = app.add_subcommand("dtw", "Align two pose files");
  dtw->add_option("a", pose_a, "First pose file")->required();
  dtw->add_option("b", pose_b, "Second pose file")->required();

  auto* inspect = app.add_subcommand("inspect-checkpoint", "Describe a checkpoint");
  inspect->add_option("checkpoint", model_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error category=usage: %s\n", e.what());
    return 64;
  }

  try {
    if (synth->parsed()) {
      check(sf_synth_data(compose_config(config_path, "", "", seed, "", true).c_str(), out_dir.c_str()));
      std::printf("wrote toy corpus to %s\n", out_dir.c_str());
    } else if (train->parsed()) {
      check(sf_train(compose_config(config_path, task, mode, seed, data_dir, false).c_str(), out_dir.c_str(), 1));
    } else if (translate->parsed()) {
      const std::string text = input_path.empty()
                                   ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                   : read_file(input_path);
      Model m(model_path);
      char* out = nullptr;
      check(sf_translate(m.get(), text.c_str(), &out));
      std::fputs(take(out).c_str(), stdout);
    } else if (produce->parsed()) {
      Model primary(model_path);
      std::unique_ptr<Model> g2p;
      if (!g2p_path.empty()) g2p = std::make_unique<Model>(g2p_path);
      check(sf_produce(primary.get(), g2p ? g2p->get() : nullptr, data_dir.c_str(), split.c_str(), mode.c_str(),
                       max_frames, out_dir.c_str()));
      std::printf("wrote %s productions to %s\n", split.c_str(), out_dir.c_str());
    } else if (evaluate->parsed()) {
      Model p2t(model_path);
      char* report = nullptr;
      check(sf_evaluate(p2t.get(), productions_dir.c_str(), data_dir.c_str(), split.c_str(), &report));
      std::printf("%s\n", take(report).c_str());
    } else if (dtw->parsed()) {
      double total = 0.0, normalized = 0.0;
      std::size_t length = 0;
      check(sf_dtw(pose_a.c_str(), pose_b.c_str(), &total, &normalized, &length));
      std::printf("total=%.9g normalized=%.9g path_length=%zu\n", total, normalized, length);
    } else if (inspect->parsed()) {
      Model m(model_path);
      char* out = nullptr;
      check(sf_model_describe(m.get(), &out));
      std::printf("%s\n", take(out).c_str());
    }
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& c : msg) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::fprintf(stderr, "error category=%s: %s\n", sf_status_name(f.status), msg.c_str());
    return static_cast<int>(f.status);
  }
  return 0;
}
