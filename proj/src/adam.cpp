#include "xsql/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace xsql {

AdamState adam_init(const ParameterStore& params) {
  AdamState state;
  state.m.reserve(params.count());
  state.v.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    state.m.push_back(Tensor::zeros(params.at(i).value.shape));
    state.v.push_back(Tensor::zeros(params.at(i).value.shape));
  }
  return state;
}

void adam_step(ParameterStore& params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.size() != params.count() || state.v.size() != params.count()) {
    throw std::invalid_argument("adam_step: state does not match parameter store");
  }
  state.t += 1;
  Real bc1 = 1.0 - std::pow(cfg.beta1, static_cast<Real>(state.t));
  Real bc2 = 1.0 - std::pow(cfg.beta2, static_cast<Real>(state.t));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Parameter& p = params.at(i);
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    if (!m.same_shape(p.value)) {
      throw std::invalid_argument("adam_step: moment shape mismatch for " + p.name);
    }
    for (std::size_t j = 0; j < p.value.values.size(); ++j) {
      Real g = p.grad.values[j];
      m.values[j] = cfg.beta1 * m.values[j] + (1.0 - cfg.beta1) * g;
      v.values[j] = cfg.beta2 * v.values[j] + (1.0 - cfg.beta2) * g * g;
      Real mhat = m.values[j] / bc1;
      Real vhat = v.values[j] / bc2;
      p.value.values[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace xsql
