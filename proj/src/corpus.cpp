// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "signforge/errors.hpp"
#include "signforge/vocabulary.hpp"

namespace sf {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing corpus file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<ParallelSample> load_split(const std::string& dir, const std::string& split) {
  const fs::path root(dir);
  const std::vector<std::string> ids = read_lines(root / (split + ".ids"));
  const std::vector<std::string> text = read_lines(root / (split + ".text"));
  std::optional<std::vector<std::string>> gloss;
  if (fs::exists(root / (split + ".gloss"))) gloss = read_lines(root / (split + ".gloss"));
  if (ids.empty()) throw LoadError("split '" + split + "' in " + dir + " has no samples");
  if (text.size() != ids.size()) {
    throw LoadError(split + ".text has " + std::to_string(text.size()) + " lines but " + split + ".ids has " +
                    std::to_string(ids.size()));
  }
  if (gloss && gloss->size() != ids.size()) {
    throw LoadError(split + ".gloss has " + std::to_string(gloss->size()) + " lines but " + split + ".ids has " +
                    std::to_string(ids.size()));
  }
  std::vector<ParallelSample> samples;
  samples.reserve(ids.size());
  std::set<std::string> seen;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    ParallelSample s;
    const TokenSeq id_tokens = tokenize(ids[k]);
    if (id_tokens.size() != 1) throw LoadError(split + ".ids line " + std::to_string(k + 1) + " is not a single id");
    s.id = id_tokens.front();
    if (!seen.insert(s.id).second) throw LoadError("duplicate sample id '" + s.id + "' in " + split + ".ids");
    s.text = tokenize(text[k]);
    if (s.text.empty()) throw LoadError(split + ".text line " + std::to_string(k + 1) + " is empty");
    if (gloss) {
      s.gloss = tokenize((*gloss)[k]);
      if (s.gloss->empty()) throw LoadError(split + ".gloss line " + std::to_string(k + 1) + " is empty");
    }
    s.pose = read_pose_file((root / "pose" / (s.id + ".pose3")).string());
    if (!samples.empty() && s.pose.joints != samples.front().pose.joints) {
      throw LoadError("pose file for '" + s.id + "' declares J=" + std::to_string(s.pose.joints) +
                      " but earlier files declare J=" + std::to_string(samples.front().pose.joints));
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_split(const std::string& dir, const std::string& split, const std::vector<ParallelSample>& samples) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "pose", ec);
  if (ec) throw IoError("cannot create " + (root / "pose").string() + ": " + ec.message());
  std::vector<std::string> ids;
  std::vector<std::string> text;
  std::vector<std::string> gloss;
  bool all_gloss = !samples.empty();
  for (const auto& s : samples) {
    ids.push_back(s.id);
    text.push_back(join_tokens(s.text));
    if (s.gloss) {
      gloss.push_back(join_tokens(*s.gloss));
    } else {
      all_gloss = false;
    }
    write_pose_file((root / "pose" / (s.id + ".pose3")).string(), s.pose);
  }
  write_lines(root / (split + ".ids"), ids);
  write_lines(root / (split + ".text"), text);
  if (all_gloss) write_lines(root / (split + ".gloss"), gloss);
}

RigDescription read_rig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing rig description " + path);
  RigDescription rig;
  bool has_j = false;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError(path + ":" + std::to_string(number) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    std::size_t parsed = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(value, &parsed);
    } catch (const std::exception&) {
      parsed = 0;
    }
    if (parsed == 0 || parsed != value.size()) {
      throw LoadError(path + ":" + std::to_string(number) + ": '" + value + "' is not a joint index");
    }
    if (key == "J") {
      rig.joints = v;
      has_j = true;
    } else if (key == "root") {
      rig.root = v;
    } else if (key == "shoulder_l") {
      rig.shoulder_l = v;
    } else if (key == "shoulder_r") {
      rig.shoulder_r = v;
    } else {
      throw LoadError(path + ":" + std::to_string(number) + ": unknown key '" + key + "'");
    }
  }
  if (!has_j || rig.joints == 0) throw LoadError(path + " does not declare J");
  if (rig.root >= rig.joints || rig.shoulder_l >= rig.joints || rig.shoulder_r >= rig.joints) {
    throw LoadError(path + " names a joint outside 0.." + std::to_string(rig.joints - 1));
  }
  return rig;
}

void write_rig(const std::string& path, const RigDescription& rig) {
  write_lines(path, {"J=" + std::to_string(rig.joints), "root=" + std::to_string(rig.root),
                     "shoulder_l=" + std::to_string(rig.shoulder_l), "shoulder_r=" + std::to_string(rig.shoulder_r)});
}

PoseSequence normalize_skeleton(const PoseSequence& pose, const RigDescription& rig, NormalizationParams* params) {
  if (pose.joints != rig.joints) {
    throw ParameterError("pose has " + std::to_string(pose.joints) + " joints but the rig declares " +
                         std::to_string(rig.joints));
  }
  const std::size_t len = pose.length();
  const std::size_t w = pose.width();
  NormalizationParams p;
  p.root_offsets.resize(len * 3);
  double shoulder = 0.0;
  for (std::size_t u = 0; u < len; ++u) {
    const auto f = pose.frame(u);
    std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(3 * rig.root), 3, p.root_offsets.begin() + 3 * u);
    shoulder += frame_distance(f.subspan(3 * rig.shoulder_l, 3), f.subspan(3 * rig.shoulder_r, 3));
  }
  shoulder /= static_cast<double>(len);
  if (!(shoulder > 0.0)) throw ContractError("degenerate skeleton: mean shoulder distance is zero");
  p.scale = 1.0 / shoulder;
  PoseSequence out = pose;
  for (std::size_t u = 0; u < len; ++u) {
    for (std::size_t c = 0; c < w; ++c) {
      const double centered = static_cast<double>(pose.frames[u * w + c]) - p.root_offsets[3 * u + c % 3];
      out.frames[u * w + c] = static_cast<Real>(centered * p.scale);
    }
  }
  if (params) *params = std::move(p);
  return out;
}

PoseSequence denormalize_skeleton(const PoseSequence& pose, const RigDescription& rig,
                                  const NormalizationParams& params) {
  if (pose.joints != rig.joints) throw ParameterError("pose joint count does not match the rig");
  if (params.root_offsets.size() != 3 * pose.length()) {
    throw ParameterError("normalization offsets do not match the sequence length");
  }
  PoseSequence out = pose;
  const std::size_t w = pose.width();
  for (std::size_t u = 0; u < pose.length(); ++u) {
    for (std::size_t c = 0; c < w; ++c) {
      out.frames[u * w + c] = static_cast<Real>(static_cast<double>(pose.frames[u * w + c]) / params.scale +
                                                params.root_offsets[3 * u + c % 3]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void ToyCorpusConfig::validate() const {
  if (vocab_size < 1) throw ParameterError("toy.vocab_size must be positive");
  if (train < 1 || dev < 1 || test < 1) throw ParameterError("toy split sizes must be positive");
  if (min_tokens < 1 || max_tokens < min_tokens) throw ParameterError("toy token range is invalid");
  if (min_frames < 1 || max_frames < min_frames) throw ParameterError("toy frame range is invalid");
  if (joints < 4) throw ParameterError("toy.joints must be at least 4 (root, two shoulders, one hand)");
  if (crossfade < 0 || crossfade >= min_frames) throw ParameterError("toy.crossfade must lie in [0, min_frames)");
  double possible = 0.0;
  for (int n = min_tokens; n <= max_tokens; ++n) possible += std::pow(static_cast<double>(vocab_size), n);
  if (possible < static_cast<double>(train + dev + test)) {
    throw ParameterError("toy configuration cannot produce enough distinct sentences");
  }
}

namespace {

struct Primitive {
  int frames = 0;
  std::vector<double> offset;
  std::vector<double> amplitude;
  std::vector<double> cycles;
  std::vector<double> phase;
};

std::string toy_token(int k, bool gloss) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), gloss ? "W%02d" : "w%02d", k);
  return buf;
}

}  // namespace

ToyCorpus make_toy_corpus(const ToyCorpusConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto joints = static_cast<std::size_t>(cfg.joints);
  const std::size_t w = 3 * joints;
  ToyCorpus corpus;
  corpus.rig = RigDescription{joints, 0, 1, 2};

  // Joints 0..2 form a static torso already in normalized units; the rest
  // move around fixed rest positions.
  std::vector<double> rest(w, 0.0);
  rest[3] = -0.5;
  rest[6] = 0.5;
  for (std::size_t j = 3; j < joints; ++j) {
    rest[3 * j] = j % 2 == 1 ? -0.6 : 0.6;
    rest[3 * j + 1] = -0.8 + 0.3 * static_cast<double>((j - 3) / 2);
    rest[3 * j + 2] = 0.2;
  }
  std::vector<Primitive> primitives(static_cast<std::size_t>(cfg.vocab_size));
  for (auto& p : primitives) {
    p.frames = static_cast<int>(rng.between(cfg.min_frames, cfg.max_frames));
    for (std::size_t c = 0; c < w; ++c) {
      const bool moving = c >= 9;
      p.offset.push_back(moving ? rng.uniform(-0.4, 0.4) : 0.0);
      p.amplitude.push_back(moving ? rng.uniform(0.1, 0.4) : 0.0);
      p.cycles.push_back(moving ? rng.uniform(0.25, 1.0) : 0.0);
      p.phase.push_back(moving ? rng.uniform(0.0, 2.0 * std::numbers::pi) : 0.0);
    }
  }
  auto render = [&](const Primitive& p) {
    std::vector<double> out(static_cast<std::size_t>(p.frames) * w);
    for (int t = 0; t < p.frames; ++t) {
      const double x = static_cast<double>(t) / static_cast<double>(p.frames);
      for (std::size_t c = 0; c < w; ++c) {
        out[static_cast<std::size_t>(t) * w + c] =
            rest[c] + p.offset[c] + p.amplitude[c] * std::sin(2.0 * std::numbers::pi * p.cycles[c] * x + p.phase[c]);
      }
    }
    return out;
  };

  const auto total = static_cast<std::size_t>(cfg.train + cfg.dev + cfg.test);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> sentences;
  while (sentences.size() < total) {
    const auto len = static_cast<std::size_t>(rng.between(cfg.min_tokens, cfg.max_tokens));
    std::vector<int> s(len);
    for (auto& t : s) t = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.vocab_size)));
    if (seen.insert(s).second) sentences.push_back(std::move(s));
  }

  const auto fade = static_cast<std::size_t>(cfg.crossfade);
  for (std::size_t k = 0; k < total; ++k) {
    const std::vector<int>& s = sentences[k];
    std::vector<int> order = s;
    if (!cfg.identity_gloss) std::reverse(order.begin(), order.end());
    ParallelSample sample;
    for (int t : s) sample.text.push_back(toy_token(t, false));
    TokenSeq gloss;
    for (int t : order) gloss.push_back(toy_token(t, true));
    sample.gloss = gloss;

    std::vector<double> frames;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::vector<double> seg = render(primitives[static_cast<std::size_t>(order[i])]);
      std::size_t start = 0;
      if (i > 0 && fade > 0) {
        const std::size_t base = frames.size() - fade * w;
        for (std::size_t f = 0; f < fade; ++f) {
          const double a = static_cast<double>(f + 1) / static_cast<double>(fade + 1);
          for (std::size_t c = 0; c < w; ++c) {
            double& dst = frames[base + f * w + c];
            dst = (1.0 - a) * dst + a * seg[f * w + c];
          }
        }
        start = fade * w;
      }
      frames.insert(frames.end(), seg.begin() + static_cast<std::ptrdiff_t>(start), seg.end());
    }
    std::vector<Real> values(frames.begin(), frames.end());
    // Round through the text format so that in-memory and on-disk corpora agree.
    sample.pose = parse_pose(format_pose(make_pose_sequence(joints, std::move(values))));

    const char* split = k < static_cast<std::size_t>(cfg.train)             ? "train"
                        : k < static_cast<std::size_t>(cfg.train + cfg.dev) ? "dev"
                                                                            : "test";
    char id[32];
    std::vector<ParallelSample>* dst = &corpus.train;
    std::size_t index = k;
    if (split[0] == 'd') {
      dst = &corpus.dev;
      index -= static_cast<std::size_t>(cfg.train);
    } else if (split[0] == 't' && split[1] == 'e') {
      dst = &corpus.test;
      index -= static_cast<std::size_t>(cfg.train + cfg.dev);
    }
    std::snprintf(id, sizeof(id), "%s_%04zu", split, index);
    sample.id = id;
    dst->push_back(std::move(sample));
  }
  return corpus;
}

void synth_toy_corpus(const ToyCorpusConfig& cfg, const std::string& out_dir) {
  const ToyCorpus corpus = make_toy_corpus(cfg);
  write_split(out_dir, "train", corpus.train);
  write_split(out_dir, "dev", corpus.dev);
  write_split(out_dir, "test", corpus.test);
  write_rig((fs::path(out_dir) / "rig.cfg").string(), corpus.rig);
}

std::vector<std::vector<std::size_t>> batchify(const std::vector<std::size_t>& lengths, std::size_t batch_size,
                                               Rng* rng) {
  if (batch_size == 0) throw ParameterError("batch size must be at least 1");
  std::vector<std::size_t> order(lengths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (rng) rng->shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  }
  if (rng) rng->shuffle(batches);
  return batches;
}

}  // namespace sf
