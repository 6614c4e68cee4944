// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/signforge.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <memory>
#include <new>
#include <string>

#include "signforge/config.hpp"
#include "signforge/corpus.hpp"
#include "signforge/errors.hpp"
#include "signforge/metrics.hpp"
#include "signforge/pipeline.hpp"
#include "signforge/vocabulary.hpp"

struct sf_model {
  std::unique_ptr<sf::ModelBundle> bundle;
};

namespace {

thread_local std::string g_last_error;

sf_status status_for(sf::ErrorCategory c) {
  switch (c) {
    case sf::ErrorCategory::kParameter: return SF_ERR_PARAMETER;
    case sf::ErrorCategory::kDimension: return SF_ERR_DIMENSION;
    case sf::ErrorCategory::kContract: return SF_ERR_CONTRACT;
    case sf::ErrorCategory::kVocabulary: return SF_ERR_VOCABULARY;
    case sf::ErrorCategory::kDegenerateMask: return SF_ERR_DEGENERATE_MASK;
    case sf::ErrorCategory::kLoad: return SF_ERR_LOAD;
    case sf::ErrorCategory::kIo: return SF_ERR_IO;
    case sf::ErrorCategory::kConfig: return SF_ERR_CONFIG;
  }
  return SF_ERR_INTERNAL;
}

template <typename F>
sf_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return SF_OK;
  } catch (const sf::Error& e) {
    g_last_error = e.what();
    return status_for(e.category());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SF_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw sf::ParameterError(std::string(what) + " must not be NULL");
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "1.0.0"; }

const char* sf_status_name(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERR_PARAMETER: return "parameter";
    case SF_ERR_DIMENSION: return "dimension";
    case SF_ERR_CONTRACT: return "contract";
    case SF_ERR_VOCABULARY: return "vocabulary";
    case SF_ERR_DEGENERATE_MASK: return "degenerate_mask";
    case SF_ERR_LOAD: return "load";
    case SF_ERR_IO: return "io";
    case SF_ERR_CONFIG: return "config";
    case SF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sf_last_error(void) { return g_last_error.c_str(); }

void sf_string_free(char* s) { std::free(s); }

sf_status sf_synth_data(const char* config_text, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    const sf::RunConfig cfg = sf::RunConfig::parse(config_text ? config_text : "");
    sf::synth_toy_corpus(cfg.toy, out_dir);
  });
}

sf_status sf_train(const char* config_text, const char* out_dir, int echo) {
  return guarded([&] {
    require(config_text, "config_text");
    require(out_dir, "out_dir");
    const sf::RunConfig cfg = sf::RunConfig::parse(config_text);
    sf::train_model(cfg, out_dir, echo ? &std::cout : nullptr);
  });
}

sf_status sf_model_load(const char* path, sf_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<sf_model>();
    m->bundle = sf::ModelBundle::load(path);
    *out = m.release();
  });
}

void sf_model_free(sf_model* model) { delete model; }

sf_status sf_model_describe(const sf_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = copy_out(model->bundle->describe());
  });
}

sf_status sf_translate(const sf_model* t2g, const char* text, char** out) {
  return guarded([&] {
    require(t2g, "model");
    require(text, "text");
    require(out, "out");
    std::vector<sf::TokenSeq> lines;
    std::string s(text);
    std::size_t start = 0;
    while (start < s.size()) {
      std::size_t end = s.find('\n', start);
      if (end == std::string::npos) end = s.size();
      lines.push_back(sf::tokenize(std::string_view(s).substr(start, end - start)));
      start = end + 1;
    }
    if (lines.empty()) throw sf::ParameterError("no input lines to translate");
    const auto glosses = sf::translate_tokens(*t2g->bundle, lines);
    std::string result;
    for (const auto& g : glosses) result += sf::join_tokens(g) + "\n";
    *out = copy_out(result);
  });
}

sf_status sf_produce(const sf_model* primary, const sf_model* g2p, const char* data_dir, const char* split,
                     const char* mode, size_t max_frames, const char* out_dir) {
  return guarded([&] {
    require(primary, "primary model");
    require(data_dir, "data_dir");
    require(split, "split");
    require(mode, "mode");
    require(out_dir, "out_dir");
    sf::ProductionMode m;
    try {
      m = sf::parse_mode(mode);
    } catch (const sf::ConfigError& e) {
      throw sf::ParameterError(e.what());
    }
    const sf::ModelBundle& pose_model = g2p ? *g2p->bundle : *primary->bundle;
    const auto samples = sf::load_corpus_split(pose_model.config(), data_dir, split);
    const auto poses = sf::produce_poses(*primary->bundle, g2p ? g2p->bundle.get() : nullptr, samples, m,
                                         max_frames, 0.0);
    sf::write_productions(out_dir, split, samples, poses);
  });
}

sf_status sf_evaluate(const sf_model* p2t, const char* production_dir, const char* data_dir, const char* split,
                      char** report) {
  return guarded([&] {
    require(p2t, "p2t model");
    require(production_dir, "production_dir");
    require(data_dir, "data_dir");
    require(split, "split");
    require(report, "report");
    const auto references = sf::load_corpus_split(p2t->bundle->config(), data_dir, split);
    std::vector<sf::ParallelSample> matched;
    const auto poses = sf::read_productions(production_dir, split, references, &matched);
    *report = copy_out(sf::format_report(sf::evaluate_productions(*p2t->bundle, poses, matched)));
  });
}

sf_status sf_dtw(const char* pose_a, const char* pose_b, double* total_cost, double* normalized_cost,
                 size_t* path_length) {
  return guarded([&] {
    require(pose_a, "pose_a");
    require(pose_b, "pose_b");
    const sf::AlignmentResult r = sf::dtw_align(sf::read_pose_file(pose_a), sf::read_pose_file(pose_b));
    if (total_cost) *total_cost = r.total_cost;
    if (normalized_cost) *normalized_cost = r.normalized_cost;
    if (path_length) *path_length = r.path.size();
  });
}

}  // extern "C"
