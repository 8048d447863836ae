#include "graphtag/params.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace graphtag {

Parameter& ParamStore::add(std::string name, Tensor value) {
  if (index_.count(name)) throw Error("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value)));
  return *params_.back();
}

Parameter& ParamStore::get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("unknown parameter: " + std::string(name));
  return *params_[it->second];
}

const Parameter& ParamStore::get(std::string_view name) const {
  return const_cast<ParamStore*>(this)->get(name);
}

const Parameter* ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : params_[it->second].get();
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParamStore::value_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::vector<Tensor> ParamStore::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParamStore::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) throw Error("snapshot size does not match parameter store");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!same_shape(values[i], params_[i]->value)) {
      throw_shape_mismatch("restore " + params_[i]->name(), params_[i]->value.shape(),
                           values[i].shape());
    }
    params_[i]->value = values[i];
  }
}

namespace {

constexpr std::array<char, 8> kMagic{'G', 'T', 'A', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kFloat64 = 1;

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}

  template <typename T>
  void uint(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out_.write(reinterpret_cast<const char*>(buf), sizeof(T));
  }
  void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  template <typename T>
  T uint() {
    unsigned char buf[sizeof(T)];
    read(reinterpret_cast<char*>(buf), sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }
  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

 private:
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (!in_) throw Error("truncated checkpoint file: " + path_.string());
  }

  std::ifstream& in_;
  const std::filesystem::path& path_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  Writer w(out);
  w.bytes(std::string_view(kMagic.data(), kMagic.size()));
  w.uint<std::uint32_t>(kVersion);
  w.uint<std::uint64_t>(ckpt.metadata.size());
  w.bytes(ckpt.metadata);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.uint<std::uint8_t>(kFloat64);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.uint<std::uint64_t>(d);
  }
  for (const auto& entry : ckpt.tensors) {
    for (double v : entry.second.data()) w.f64(v);
  }
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  Reader r(in, path);
  if (r.bytes(kMagic.size()) != std::string_view(kMagic.data(), kMagic.size())) {
    throw Error("not a graphtag checkpoint: " + path.string());
  }
  const auto version = r.uint<std::uint32_t>();
  if (version != kVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  }
  Checkpoint ckpt;
  ckpt.metadata = r.bytes(r.uint<std::uint64_t>());
  const auto count = r.uint<std::uint32_t>();
  std::vector<std::pair<std::string, Shape>> headers;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.bytes(r.uint<std::uint32_t>());
    const auto dtype = r.uint<std::uint8_t>();
    if (dtype != kFloat64) throw Error("unsupported dtype for tensor " + name);
    Shape shape(r.uint<std::uint32_t>());
    for (auto& d : shape) d = r.uint<std::uint64_t>();
    headers.emplace_back(std::move(name), std::move(shape));
  }
  for (auto& [name, shape] : headers) {
    std::vector<double> data(shape_size(shape));
    for (double& v : data) v = r.f64();
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return ckpt;
}

Checkpoint make_checkpoint(const ParamStore& store, std::string metadata) {
  Checkpoint ckpt;
  ckpt.metadata = std::move(metadata);
  for (const Parameter* p : store.all()) ckpt.tensors.emplace_back(p->name(), p->value);
  return ckpt;
}

void load_checkpoint_values(ParamStore& store, const Checkpoint& ckpt) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name.emplace(name, &t);
  for (Parameter* p : store.all()) {
    auto it = by_name.find(p->name());
    if (it == by_name.end()) throw Error("checkpoint lacks parameter " + p->name());
    if (!same_shape(*it->second, p->value)) {
      throw_shape_mismatch("checkpoint parameter " + p->name(), p->value.shape(),
                           it->second->shape());
    }
    p->value = *it->second;
  }
}

}  // namespace graphtag
