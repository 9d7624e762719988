#include "artigen/numcore/params.hpp"

#include <cmath>

#include "artigen/error.hpp"

namespace artigen::numcore {

void ParamSet::add(const std::string& name, Tensor value) {
  if (params_.count(name)) throw InvalidArgument("duplicate parameter '" + name + "'");
  if (!value.all_finite()) throw NumericalError("parameter '" + name + "' initialized with non-finite values");
  Parameter p;
  p.first_moment = Tensor(value.shape(), 0.0);
  p.second_moment = Tensor(value.shape(), 0.0);
  p.value = std::move(value);
  params_.emplace(name, std::move(p));
}

const Parameter& ParamSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return it->second;
}

Parameter& ParamSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamSet::value(const std::string& name) const { return at(name).value; }
Tensor& ParamSet::value(const std::string& name) { return at(name).value; }

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

bool operator==(const Parameter& a, const Parameter& b) {
  return a.value == b.value && a.first_moment == b.first_moment && a.second_moment == b.second_moment &&
         a.step == b.step;
}

bool ParamSet::operator==(const ParamSet& other) const { return params_ == other.params_; }

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w(Shape{fan_in, fan_out});
  for (double& v : w.data()) v = rng.uniform(-limit, limit);
  return w;
}

void adam_step(ParamSet& params, const Gradients& grads, double lr, const AdamConfig& config) {
  for (const auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    require_same_shape(p.value, it->second, ("adam_step(" + name + ")").c_str());
    if (!it->second.all_finite()) throw NumericalError("non-finite gradient for parameter '" + name + "'");
  }
  for (auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    const auto g = it->second.data();
    auto w = p.value.data();
    auto m = p.first_moment.data();
    auto v = p.second_moment.data();
    ++p.step;
    const double t = static_cast<double>(p.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

double lr_at(std::size_t step, double base_lr, std::size_t period, double gamma) {
  if (period == 0) throw InvalidArgument("lr_at: period must be positive");
  return base_lr * std::pow(gamma, static_cast<double>(step / period));
}

}  // namespace artigen::numcore
