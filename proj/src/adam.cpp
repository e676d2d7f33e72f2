#include "segtron/adam.hpp"

#include <cmath>

#include "segtron/errors.hpp"

namespace segtron {

void adam_step(const NamedParams& params, const std::map<std::string, Tensor>& grads,
               AdamState& state, const AdamConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (const auto& [name, param] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    if (!g.same_shape(*param)) {
      throw UsageError("adam_step: gradient shape mismatch for " + name);
    }
    Tensor& m = state.m.try_emplace(name, Tensor::zeros_like(*param)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor::zeros_like(*param)).first->second;
    double* pd = param->data();
    double* md = m.data();
    double* vd = v.data();
    const double* gd = g.data();
    for (std::size_t i = 0; i < param->size(); ++i) {
      md[i] = config.beta1 * md[i] + (1.0 - config.beta1) * gd[i];
      vd[i] = config.beta2 * vd[i] + (1.0 - config.beta2) * gd[i] * gd[i];
      const double m_hat = md[i] / bc1;
      const double v_hat = vd[i] / bc2;
      pd[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace segtron
