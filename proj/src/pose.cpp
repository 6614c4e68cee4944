// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/pose.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "signforge/errors.hpp"

namespace sf {

void PoseSequence::validate(bool ground_truth) const {
  if (joints == 0 || frames.empty() || frames.size() % width() != 0) {
    throw ContractError("pose sequence has no complete frames");
  }
  if (counters.size() != length()) throw ContractError("pose counters do not match frame count");
  for (Real v : frames) {
    if (!std::isfinite(v)) throw ContractError("pose sequence contains a non-finite coordinate");
  }
  for (std::size_t u = 0; u < counters.size(); ++u) {
    if (counters[u] < Real(0) || counters[u] > Real(1)) throw ContractError("pose counter outside [0, 1]");
    if (u > 0 && counters[u] < counters[u - 1]) throw ContractError("pose counters decrease");
  }
  if (ground_truth && counters.back() != Real(1)) throw ContractError("ground-truth pose must end at counter 1");
}

std::vector<Real> counter_schedule(std::size_t frame_count) {
  if (frame_count == 0) throw ParameterError("counter schedule needs at least one frame");
  std::vector<Real> out(frame_count);
  for (std::size_t u = 1; u <= frame_count; ++u) {
    out[u - 1] = static_cast<Real>(static_cast<double>(u) / static_cast<double>(frame_count));
  }
  return out;
}

PoseSequence make_pose_sequence(std::size_t joints, std::vector<Real> frames) {
  if (joints == 0 || frames.empty() || frames.size() % (3 * joints) != 0) {
    throw ParameterError("frame data is not a whole number of " + std::to_string(joints) + "-joint frames");
  }
  PoseSequence p;
  p.joints = joints;
  p.frames = std::move(frames);
  p.counters = counter_schedule(p.length());
  return p;
}

std::string format_pose(const PoseSequence& pose) {
  std::string out = "POSE3 J=" + std::to_string(pose.joints) + " U=" + std::to_string(pose.length()) + "\n";
  char buf[64];
  for (std::size_t u = 0; u < pose.length(); ++u) {
    const auto f = pose.frame(u);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ' ';
      const auto res = std::to_chars(buf, buf + sizeof(buf), f[i]);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

PoseSequence parse_pose(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  unsigned long joints = 0;
  unsigned long frames = 0;
  char tail = 0;
  if (std::sscanf(header.c_str(), "POSE3 J=%lu U=%lu%c", &joints, &frames, &tail) != 2 || joints == 0 ||
      frames == 0) {
    throw LoadError("malformed pose header in " + origin + ": '" + header + "'");
  }
  const std::size_t width = 3 * joints;
  std::vector<Real> values;
  values.reserve(width * frames);
  std::string line;
  for (std::size_t u = 0; u < frames; ++u) {
    if (!std::getline(in, line)) throw LoadError(origin + " ends after " + std::to_string(u) + " frames");
    const char* p = line.data();
    const char* end = line.data() + line.size();
    std::size_t count = 0;
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p >= end) break;
      Real v{};
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw LoadError("bad number on frame " + std::to_string(u) + " of " + origin);
      values.push_back(v);
      p = res.ptr;
      ++count;
    }
    if (count != width) {
      throw LoadError("frame " + std::to_string(u) + " of " + origin + " has " + std::to_string(count) +
                      " values, expected " + std::to_string(width));
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw LoadError(origin + " has more frames than its header declares");
    }
  }
  return make_pose_sequence(joints, std::move(values));
}

void write_pose_file(const std::string& path, const PoseSequence& pose) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write pose file " + path);
  out << format_pose(pose);
  if (!out) throw IoError("failed writing pose file " + path);
}

PoseSequence read_pose_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing pose file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pose(buf.str(), path);
}

}  // namespace sf
