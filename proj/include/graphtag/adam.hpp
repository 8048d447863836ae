#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphtag/autograd.hpp"

namespace graphtag {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter moment accumulators. Empty until the first step.
struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// One bias-corrected Adam update of every parameter from Parameter::grad.
// Increments state.t before computing the correction.
void adam_step(std::span<Parameter* const> params, AdamState& state);

// Single-tensor form of the same recurrence; `t` is the already-incremented
// step count.
void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t t,
                 const AdamConfig& config);

}  // namespace graphtag
