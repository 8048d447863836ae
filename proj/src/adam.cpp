#include "graphtag/adam.hpp"

#include <cmath>

namespace graphtag {

void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t t,
                 const AdamConfig& c) {
  if (!same_shape(param, grad)) throw_shape_mismatch("adam grad", param.shape(), grad.shape());
  if (!same_shape(param, m)) throw_shape_mismatch("adam first moment", param.shape(), m.shape());
  if (!same_shape(param, v)) throw_shape_mismatch("adam second moment", param.shape(), v.shape());
  if (t == 0) throw Error("adam_update: step count must be incremented before use");
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (state.m.empty()) {
    for (const Parameter* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  if (state.m.size() != params.size()) {
    throw Error("adam_step: state tracks " + std::to_string(state.m.size()) +
                " parameters, got " + std::to_string(params.size()));
  }
  ++state.t;
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i]->value, params[i]->grad, state.m[i], state.v[i], state.t, state.config);
  }
}

}  // namespace graphtag
