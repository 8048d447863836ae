#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "graphtag/autograd.hpp"
#include "graphtag/model.hpp"
#include "graphtag/rng.hpp"
#include "graphtag/training.hpp"

namespace graphtag::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor t(shape);
  for (auto& x : t.storage()) x = rng.uniform(-scale, scale);
  return t;
}

using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Largest |analytic - numeric| / max(1, |analytic|, |numeric|) over every
// input entry, with central differences of step h.
inline double gradient_error(const ScalarFn& f, std::vector<Tensor> inputs, double h = 1e-5) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  Var loss = f(tape, vars);
  tape.backward(loss);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = vars[k].grad();
    for (std::size_t e = 0; e < inputs[k].size(); ++e) {
      auto eval = [&](double delta) {
        std::vector<Tensor> moved = inputs;
        moved[k][e] += delta;
        Tape t;
        std::vector<Var> vs;
        for (const auto& m : moved) vs.push_back(t.variable(m));
        return f(t, vs).value().item();
      };
      const double numeric = (eval(h) - eval(-h)) / (2 * h);
      const double a = analytic[e];
      worst = std::max(worst, std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)}));
    }
  }
  return worst;
}

// Same measure for every parameter of a store, the loss rebuilt by `f`.
inline double parameter_gradient_error(ParamStore& store, const std::function<Var(Tape&)>& f,
                                       double h = 1e-5, std::size_t max_entries_per_param = 0) {
  store.zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }
  double worst = 0.0;
  for (Parameter* p : store.all()) {
    const Tensor analytic = p->grad;
    const std::size_t count =
        max_entries_per_param == 0 ? p->value.size() : std::min(max_entries_per_param, p->value.size());
    for (std::size_t step = 0; step < count; ++step) {
      const std::size_t e = max_entries_per_param == 0 ? step : (step * 7919) % p->value.size();
      const double saved = p->value[e];
      p->value[e] = saved + h;
      double plus, minus;
      {
        Tape t;
        plus = f(t).value().item();
      }
      p->value[e] = saved - h;
      {
        Tape t;
        minus = f(t).value().item();
      }
      p->value[e] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double a = analytic[e];
      worst = std::max(worst, std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)}));
    }
  }
  return worst;
}

inline double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// A model small enough for unit tests.
inline ModelConfig tiny_config(Mode mode) {
  ModelConfig c = ModelConfig::defaults(mode);
  c.encoder.word_dim = 8;
  c.encoder.pos_dim = 4;
  c.encoder.stag_dim = 4;
  c.encoder.char_dim = 4;
  c.encoder.char_filters = 4;
  c.encoder.hidden = 8;
  c.encoder.layers = 2;
  c.heads.arc_dim = 8;
  c.heads.rel_dim = 4;
  c.heads.pos_dim = 8;
  c.heads.stag_dim = 8;
  return c;
}

// Small dimensions that still fit the synthetic grammar in a few dozen epochs.
inline ModelConfig small_config(Mode mode) {
  ModelConfig c = ModelConfig::defaults(mode);
  c.encoder.word_dim = 16;
  c.encoder.pos_dim = 8;
  c.encoder.stag_dim = 8;
  c.encoder.char_dim = 8;
  c.encoder.char_filters = 8;
  c.encoder.hidden = 32;
  c.encoder.layers = 2;
  c.heads.arc_dim = 32;
  c.heads.rel_dim = 16;
  c.heads.pos_dim = 32;
  c.heads.stag_dim = 32;
  return c;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("graphtag-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace graphtag::testing
