#pragma once

#include <cstdint>
#include <vector>

#include "xsql/graph.hpp"
#include "xsql/tensor.hpp"

namespace xsql {

struct AdamConfig {
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

/// First/second moment estimates, aligned with parameter registration order.
struct AdamState {
  std::int64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

AdamState adam_init(const ParameterStore& params);

/// One Adam update with bias correction, reading Parameter::grad in
/// registration order. Deterministic.
void adam_step(ParameterStore& params, AdamState& state, const AdamConfig& cfg);

}  // namespace xsql
