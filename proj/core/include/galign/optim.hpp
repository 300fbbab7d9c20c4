#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "galign/tensor.hpp"

namespace galign {

/// Ordered name -> tensor collection; order is the checkpoint record order.
struct NamedParams {
  std::vector<std::pair<std::string, Tensor>> items;

  Tensor* find(const std::string& name);
  const Tensor* find(const std::string& name) const;
  void add(std::string name, Tensor t) { items.emplace_back(std::move(name), std::move(t)); }
  void zero_grads();
};

struct OptimState {
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int step_size = 30;      // epochs between learning-rate drops
  double drop_factor = 0.1;
  std::map<std::string, std::vector<double>> momentum_buffers;
};

/// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
/// Grads are left untouched; a missing grad is an error naming the parameter.
void sgd_step(NamedParams& params, OptimState& state);

/// lr0 * drop^floor(epoch / step_size)
double scheduled_lr(double lr0, double drop_factor, int step_size, int epoch);

}  // namespace galign
