#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "graphtag/autograd.hpp"

namespace graphtag {

// Owns every learnable tensor of a model, keyed by a stable dotted name
// ("encoder.layer0.fwd.W_i"). Iteration order is insertion order, which is
// also the checkpoint order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Parameter& add(std::string name, Tensor value);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  const Parameter* find(std::string_view name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t value_count() const;

  void zero_grad();
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Checkpoint container; layout documented in docs/checkpoint-format.md.
struct Checkpoint {
  std::string metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const ParamStore& store, std::string metadata);
// Copies values by name; every store parameter must be present with the
// same shape.
void load_checkpoint_values(ParamStore& store, const Checkpoint& ckpt);

}  // namespace graphtag
