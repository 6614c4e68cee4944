// Copyright 2026 The SignForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "signforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "signforge/errors.hpp"

namespace sf {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'C', 'K'};
constexpr char kTrailer[4] = {'K', 'C', 'F', 'S'};

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
 public:
  void raw(const char* p, std::size_t n) { out.insert(out.end(), p, p + n); }
  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void strings(const std::vector<std::string>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) str(s);
  }
  void tensor(const NamedTensor& t) {
    str(t.name);
    u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) u64(d);
    for (float v : t.values) u32(std::bit_cast<std::uint32_t>(v));
  }
  void tensors(const std::vector<NamedTensor>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& t : v) tensor(t);
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end, std::string origin)
      : bytes(b), limit(end), origin_(std::move(origin)) {}
  void need(std::size_t n) const {
    if (n > limit - pos) throw LoadError(origin_ + " is truncated at byte " + std::to_string(pos));
  }
  std::uint8_t u8() {
    need(1);
    return bytes[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
    pos += n;
    return s;
  }
  std::vector<std::string> strings() {
    const std::uint32_t n = u32();
    std::vector<std::string> v;
    for (std::uint32_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }
  NamedTensor tensor() {
    NamedTensor t;
    t.name = str();
    const std::uint32_t rank = u32();
    if (rank > 8) throw LoadError(origin_ + ": tensor '" + t.name + "' has implausible rank");
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint64_t d = u64();
      if (d == 0 || d > (limit - pos)) throw LoadError(origin_ + ": tensor '" + t.name + "' has a bad extent");
      t.shape.push_back(static_cast<std::size_t>(d));
      count *= d;
      if (count > (limit - pos) / 4 + 1) throw LoadError(origin_ + " is truncated inside '" + t.name + "'");
    }
    need(static_cast<std::size_t>(count) * 4);
    t.values.resize(static_cast<std::size_t>(count));
    for (auto& v : t.values) v = std::bit_cast<float>(u32());
    return t;
  }
  std::vector<NamedTensor> tensors() {
    const std::uint32_t n = u32();
    std::vector<NamedTensor> v;
    for (std::uint32_t i = 0; i < n; ++i) v.push_back(tensor());
    return v;
  }

  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;
  std::size_t limit;

 private:
  std::string origin_;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(ckpt.version);
  w.str(ckpt.config_text);
  w.strings(ckpt.source_vocab);
  w.strings(ckpt.target_vocab);
  w.u32(ckpt.joints);
  w.u64(ckpt.epoch);
  w.u64(ckpt.step);
  w.str(ckpt.rng_state);
  w.tensors(ckpt.tensors);
  w.u8(ckpt.has_optimizer ? 1 : 0);
  if (ckpt.has_optimizer) {
    w.u64(ckpt.adam_step);
    w.f64(ckpt.adam_lr);
    w.f64(ckpt.adam_beta1);
    w.f64(ckpt.adam_beta2);
    w.f64(ckpt.adam_epsilon);
    w.tensors(ckpt.adam_first);
    w.tensors(ckpt.adam_second);
  }
  w.u64(fnv1a(w.out.data(), w.out.size()));
  w.raw(kTrailer, 4);
  return std::move(w.out);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw LoadError(origin + " is not a checkpoint (bad magic)");
  }
  Reader header(bytes, bytes.size(), origin);
  header.pos = 4;
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion) {
    throw LoadError(origin + " has checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < 20 || std::memcmp(bytes.data() + bytes.size() - 4, kTrailer, 4) != 0) {
    throw LoadError(origin + " is truncated (missing trailer)");
  }
  const std::size_t body_end = bytes.size() - 12;
  Reader sum(bytes, bytes.size() - 4, origin);
  sum.pos = body_end;
  if (sum.u64() != fnv1a(bytes.data(), body_end)) throw LoadError(origin + " is corrupted (checksum mismatch)");

  Reader r(bytes, body_end, origin);
  r.pos = 8;
  Checkpoint c;
  c.version = version;
  c.config_text = r.str();
  c.source_vocab = r.strings();
  c.target_vocab = r.strings();
  c.joints = r.u32();
  c.epoch = r.u64();
  c.step = r.u64();
  c.rng_state = r.str();
  c.tensors = r.tensors();
  const std::uint8_t flag = r.u8();
  if (flag > 1) throw LoadError(origin + " has an invalid optimizer flag");
  c.has_optimizer = flag == 1;
  if (c.has_optimizer) {
    c.adam_step = r.u64();
    c.adam_lr = r.f64();
    c.adam_beta1 = r.f64();
    c.adam_beta2 = r.f64();
    c.adam_epsilon = r.f64();
    c.adam_first = r.tensors();
    c.adam_second = r.tensors();
  }
  if (r.pos != body_end) throw LoadError(origin + " has unexpected bytes before its checksum");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes, path);
}

namespace {

NamedTensor snapshot(const std::string& name, const Shape& shape, std::span<const Real> values) {
  NamedTensor t{name, shape, {}};
  t.values.assign(values.begin(), values.end());
  return t;
}

const NamedTensor* find_named(const std::vector<NamedTensor>& v, const std::string& name) {
  for (const auto& t : v) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

}  // namespace

void capture_parameters(Checkpoint& ckpt, const ParameterStore& store, const AdamState* adam) {
  ckpt.tensors.clear();
  for (const auto& [name, t] : store.entries()) ckpt.tensors.push_back(snapshot(name, t.shape(), t.data()));
  ckpt.has_optimizer = adam != nullptr;
  ckpt.adam_first.clear();
  ckpt.adam_second.clear();
  if (!adam) return;
  ckpt.adam_step = adam->step_count;
  ckpt.adam_lr = adam->learning_rate;
  ckpt.adam_beta1 = adam->beta1;
  ckpt.adam_beta2 = adam->beta2;
  ckpt.adam_epsilon = adam->epsilon;
  const auto& entries = store.entries();
  for (std::size_t i = 0; i < adam->first_moment.size() && i < entries.size(); ++i) {
    ckpt.adam_first.push_back(snapshot(entries[i].first, entries[i].second.shape(), adam->first_moment[i]));
    ckpt.adam_second.push_back(snapshot(entries[i].first, entries[i].second.shape(), adam->second_moment[i]));
  }
}

void restore_parameters(const Checkpoint& ckpt, ParameterStore& store, AdamState* adam) {
  if (ckpt.tensors.size() != store.entries().size()) {
    for (const auto& t : ckpt.tensors) {
      if (!store.find(t.name).defined()) {
        throw LoadError("checkpoint tensor '" + t.name + "' does not exist in the model");
      }
    }
  }
  for (const auto& [name, param] : store.entries()) {
    const NamedTensor* t = find_named(ckpt.tensors, name);
    if (!t) throw LoadError("checkpoint lacks tensor '" + name + "'");
    if (t->shape != param.shape()) {
      throw LoadError("tensor '" + name + "' has shape " + shape_str(t->shape) + " in the checkpoint but " +
                      shape_str(param.shape()) + " in the model");
    }
  }
  for (auto& [name, param] : store.entries()) {
    const NamedTensor* t = find_named(ckpt.tensors, name);
    Tensor p = param;
    std::copy(t->values.begin(), t->values.end(), p.mutable_data().begin());
  }
  if (!adam) return;
  *adam = AdamState{};
  if (!ckpt.has_optimizer) return;
  adam->step_count = ckpt.adam_step;
  adam->learning_rate = ckpt.adam_lr;
  adam->beta1 = ckpt.adam_beta1;
  adam->beta2 = ckpt.adam_beta2;
  adam->epsilon = ckpt.adam_epsilon;
  if (ckpt.adam_first.empty()) return;
  for (const auto& [name, param] : store.entries()) {
    const NamedTensor* m = find_named(ckpt.adam_first, name);
    const NamedTensor* v = find_named(ckpt.adam_second, name);
    if (!m || !v || m->values.size() != param.numel() || v->values.size() != param.numel()) {
      throw LoadError("optimizer state for '" + name + "' is missing or misshapen");
    }
    adam->first_moment.emplace_back(m->values.begin(), m->values.end());
    adam->second_moment.emplace_back(v->values.begin(), v->values.end());
  }
}

}  // namespace sf
