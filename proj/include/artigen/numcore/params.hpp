#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "artigen/numcore/rng.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::numcore {

struct Parameter {
  Tensor value;
  Tensor first_moment;
  Tensor second_moment;
  std::uint64_t step = 0;
};

using Gradients = std::map<std::string, Tensor>;

// Named trainable tensors with their Adam state; iteration order is by name.
class ParamSet {
 public:
  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Tensor& value(const std::string& name) const;
  Tensor& value(const std::string& name);
  const Parameter& at(const std::string& name) const;
  Parameter& at(const std::string& name);
  std::vector<std::string> names() const;
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

  bool operator==(const ParamSet&) const;

 private:
  std::map<std::string, Parameter> params_;
};

bool operator==(const Parameter& a, const Parameter& b);

// Glorot-uniform weight of shape {fan_in, fan_out}.
Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update in place. Throws NumericalError naming the
// parameter if its gradient is not finite, before any parameter is touched.
void adam_step(ParamSet& params, const Gradients& grads, double lr, const AdamConfig& config = {});

// base_lr * gamma^floor(step / period)
double lr_at(std::size_t step, double base_lr, std::size_t period = 20, double gamma = 0.7);

}  // namespace artigen::numcore
