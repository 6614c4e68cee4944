// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the C interface and the command-line front end built on it.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "signforge/signforge.h"
#include "test_util.hpp"

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run_cli(const std::string& args, const testutil::TempDir& dir) {
  const std::string out = dir / "stdout.txt";
  const std::string err = dir / "stderr.txt";
  const std::string cmd = std::string(SIGNFORGE_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// One line, "error category=<name>: ...".
void check_error_line(const Run& r, const std::string& category) {
  CHECK(r.exit_code != 0);
  CHECK(r.err.rfind("error category=" + category + ": ", 0) == 0);
  CHECK(r.err.find('\n') == r.err.size() - 1);
}

const char* kToy = "toy.vocab_size=6\ntoy.train=12\ntoy.dev=3\ntoy.test=3\ntoy.min_tokens=2\ntoy.max_tokens=3\n";

std::string small_model(const std::string& task, const std::string& data) {
  return "task=" + task + "\ndata.dir=" + data +
         "\nmodel.layers=1\nmodel.heads=2\nmodel.d_model=16\nmodel.d_counter=4\ntrain.epochs=2\ntrain.batch_size=4\n";
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(sf_version()).size() > 0);
  CHECK(std::string(sf_status_name(SF_ERR_LOAD)) == "load");
  CHECK(std::string(sf_status_name(SF_ERR_CONFIG)) == "config");
  CHECK(std::string(sf_status_name(SF_OK)) == "ok");
}

TEST_CASE("C interface reports failures through status and message") {
  sf_model* m = nullptr;
  CHECK(sf_model_load("/nonexistent/model.ckpt", &m) != SF_OK);
  CHECK(m == nullptr);
  CHECK(std::string(sf_last_error()).find("/nonexistent/model.ckpt") != std::string::npos);
  testutil::TempDir dir("capi_err");
  CHECK(sf_train("model.bogus=1\n", dir.str().c_str(), 0) == SF_ERR_CONFIG);
  CHECK(sf_synth_data("toy.vocab_size=0\n", dir.str().c_str()) == SF_ERR_PARAMETER);
}

TEST_CASE("C interface end to end") {
  testutil::TempDir dir("capi");
  const std::string data = dir / "data";
  REQUIRE(sf_synth_data(kToy, data.c_str()) == SF_OK);
  const std::string t2g_dir = dir / "t2g";
  REQUIRE(sf_train(small_model("t2g", data).c_str(), t2g_dir.c_str(), 0) == SF_OK);
  CHECK(slurp(t2g_dir + "/train.log").find("best_epoch=") != std::string::npos);

  sf_model* t2g = nullptr;
  REQUIRE(sf_model_load((t2g_dir + "/model.ckpt").c_str(), &t2g) == SF_OK);
  char* desc = nullptr;
  REQUIRE(sf_model_describe(t2g, &desc) == SF_OK);
  CHECK(std::string(desc).find("task=t2g") != std::string::npos);
  sf_string_free(desc);
  char* gloss = nullptr;
  REQUIRE(sf_translate(t2g, "w1 w2\nw3\n", &gloss) == SF_OK);
  const std::string g = gloss;
  sf_string_free(gloss);
  CHECK(std::count(g.begin(), g.end(), '\n') == 2);

  const std::string g2p_dir = dir / "g2p";
  REQUIRE(sf_train(small_model("g2p", data).c_str(), g2p_dir.c_str(), 0) == SF_OK);
  sf_model* g2p = nullptr;
  REQUIRE(sf_model_load((g2p_dir + "/model.ckpt").c_str(), &g2p) == SF_OK);
  const std::string prod = dir / "prod";
  CHECK(sf_produce(t2g, g2p, data.c_str(), "dev", "counter-driven", 0, prod.c_str()) == SF_OK);
  CHECK(sf_produce(t2g, g2p, data.c_str(), "dev", "sideways", 0, prod.c_str()) == SF_ERR_PARAMETER);

  const std::string p2t_dir = dir / "p2t";
  REQUIRE(sf_train(small_model("p2t", data).c_str(), p2t_dir.c_str(), 0) == SF_OK);
  sf_model* p2t = nullptr;
  REQUIRE(sf_model_load((p2t_dir + "/model.ckpt").c_str(), &p2t) == SF_OK);
  char* report = nullptr;
  REQUIRE(sf_evaluate(p2t, prod.c_str(), data.c_str(), "dev", &report) == SF_OK);
  CHECK(std::string(report).rfind("bleu1=", 0) == 0);
  sf_string_free(report);

  double total = -1, normalized = -1;
  std::size_t length = 0;
  const std::string pose = data + "/pose/dev_0000.pose3";
  REQUIRE(sf_dtw(pose.c_str(), pose.c_str(), &total, &normalized, &length) == SF_OK);
  CHECK(total == 0.0);
  CHECK(normalized == 0.0);
  CHECK(length > 0);

  sf_model_free(t2g);
  sf_model_free(g2p);
  sf_model_free(p2t);
  sf_model_free(nullptr);
}

TEST_CASE("command line success and failure contract") {
  testutil::TempDir dir("cli");
  const std::string cfg = dir / "toy.cfg";
  write_text(cfg, kToy);
  const std::string data = dir / "data";
  CHECK(run_cli("synth-data --config " + cfg + " --seed 3 --out " + data, dir).exit_code == 0);

  const std::string pose = data + "/pose/dev_0000.pose3";
  const auto dtw = run_cli("dtw " + pose + " " + pose, dir);
  CHECK(dtw.exit_code == 0);
  CHECK(dtw.out.rfind("total=0 normalized=0 path_length=", 0) == 0);

  const auto usage = run_cli("train", dir);
  CHECK(usage.exit_code == 64);
  check_error_line(usage, "usage");
  CHECK(run_cli("frobnicate", dir).exit_code == 64);
  CHECK(run_cli("produce --model " + cfg + " --data " + data + " --mode sideways --out x", dir).exit_code == 64);

  const std::string bad = dir / "bad.ckpt";
  write_text(bad, "not a checkpoint");
  const auto load = run_cli("inspect-checkpoint " + bad, dir);
  CHECK(load.exit_code == SF_ERR_LOAD);
  check_error_line(load, "load");

  const std::string bad_cfg = dir / "bad.cfg";
  write_text(bad_cfg, "task=t2g\nmodel.width=3\n");
  const auto config = run_cli("train --config " + bad_cfg + " --out " + (dir / "o"), dir);
  CHECK(config.exit_code == SF_ERR_CONFIG);
  check_error_line(config, "config");

  const std::string train_cfg = dir / "train.cfg";
  write_text(train_cfg, small_model("t2p", data));
  const auto train = run_cli("train --config " + train_cfg + " --mode free --seed 5 --out " + (dir / "t2p"), dir);
  CHECK(train.exit_code == 0);
  CHECK(train.out.find("# task=t2p seed=5") != std::string::npos);
  const auto inspect = run_cli("inspect-checkpoint " + (dir / "t2p") + "/model.ckpt", dir);
  CHECK(inspect.exit_code == 0);
  CHECK(inspect.out.find("task=t2p") != std::string::npos);
  const auto produce = run_cli("produce --model " + (dir / "t2p") + "/model.ckpt --data " + data +
                                   " --mode free --max-frames 7 --out " + (dir / "prod"),
                               dir);
  CHECK(produce.exit_code == 0);
  const auto missing = run_cli("produce --model " + (dir / "t2p") + "/model.ckpt --data " + data +
                                   " --split nope --mode free --out " + (dir / "prod2"),
                               dir);
  CHECK(missing.exit_code != 0);
  CHECK(missing.err.rfind("error category=", 0) == 0);
}
