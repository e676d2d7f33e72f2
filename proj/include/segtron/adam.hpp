#pragma once

#include <map>
#include <string>
#include <vector>

#include "segtron/tensor.hpp"

namespace segtron {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates per named tensor plus the shared step count.
struct AdamState {
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
  long step = 0;
};

using NamedParams = std::vector<std::pair<std::string, Tensor*>>;

// Standard ADAM update with bias correction. Missing moment tensors are
// created lazily; tensors without a gradient entry are left untouched.
void adam_step(const NamedParams& params, const std::map<std::string, Tensor>& grads,
               AdamState& state, const AdamConfig& config);

}  // namespace segtron
