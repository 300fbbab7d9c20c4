#include "galign/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace galign {

Tensor* NamedParams::find(const std::string& name) {
  for (auto& [n, t] : items)
    if (n == name) return &t;
  return nullptr;
}

const Tensor* NamedParams::find(const std::string& name) const {
  for (const auto& [n, t] : items)
    if (n == name) return &t;
  return nullptr;
}

void NamedParams::zero_grads() {
  for (auto& [n, t] : items) t.zero_grad();
}

void sgd_step(NamedParams& params, OptimState& state) {
  for (auto& [name, t] : params.items) {
    if (!t.has_grad())
      throw std::runtime_error("sgd_step: missing grad for parameter " + name);
    auto& buf = state.momentum_buffers[name];
    if (buf.empty()) buf.assign(t.size(), 0.0);
    if (buf.size() != t.size())
      throw std::runtime_error("sgd_step: momentum buffer shape mismatch for " + name);
    auto& v = t.mutable_values();
    const auto& g = t.grad();
    for (std::size_t i = 0; i < v.size(); ++i) {
      buf[i] = state.momentum * buf[i] + g[i] + state.weight_decay * v[i];
      v[i] -= state.lr * buf[i];
    }
  }
}

double scheduled_lr(double lr0, double drop_factor, int step_size, int epoch) {
  return lr0 * std::pow(drop_factor, epoch / step_size);
}

}  // namespace galign
