#include "artigen/jointdiff/schedule.hpp"

#include <cmath>

#include "artigen/artgraph/graph.hpp"
#include "artigen/error.hpp"

namespace artigen::jointdiff {

namespace {

void fill_sigma(NoiseSchedule& s) {
  s.sigma.assign(s.steps + 1, 0.0);
  for (std::size_t t = 1; t <= s.steps; ++t) {
    double var = s.beta[t];
    if (s.rule == SigmaRule::kPosterior) var *= (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]);
    s.sigma[t] = std::sqrt(var);
  }
}

void require_step(const NoiseSchedule& s, std::size_t t, std::size_t lo, const char* op) {
  if (t < lo || t > s.steps) {
    throw InvalidArgument(std::string(op) + ": t = " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(s.steps) + "]");
  }
  if (s.alpha_bar.size() != s.steps + 1 || s.alpha.size() != s.steps + 1 || s.sigma.size() != s.steps + 1) {
    throw InvalidArgument(std::string(op) + ": schedule tables do not match its length");
  }
}

}  // namespace

NoiseSchedule make_schedule(std::size_t T, double beta_1, double beta_T, SigmaRule rule) {
  if (T == 0) throw InvalidArgument("make_schedule: T must be at least 1");
  if (!(beta_1 > 0.0) || !(beta_1 <= beta_T) || !(beta_T < 1.0)) {
    throw InvalidArgument("make_schedule: need 0 < beta_1 <= beta_T < 1, got " + std::to_string(beta_1) + ", " +
                          std::to_string(beta_T));
  }
  NoiseSchedule s;
  s.steps = T;
  s.rule = rule;
  s.beta.assign(T + 1, 0.0);
  s.alpha.assign(T + 1, 1.0);
  s.alpha_bar.assign(T + 1, 1.0);
  s.model_t.resize(T + 1);
  for (std::size_t t = 0; t <= T; ++t) s.model_t[t] = t;
  for (std::size_t t = 1; t <= T; ++t) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    s.beta[t] = beta_1 + frac * (beta_T - beta_1);
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  fill_sigma(s);
  return s;
}

NoiseSchedule respace(const NoiseSchedule& base, std::size_t count) {
  if (count == 0 || count > base.steps) {
    throw InvalidArgument("respace: cannot keep " + std::to_string(count) + " of " + std::to_string(base.steps) +
                          " steps");
  }
  NoiseSchedule s;
  s.steps = count;
  s.rule = base.rule;
  s.beta.assign(count + 1, 0.0);
  s.alpha.assign(count + 1, 1.0);
  s.alpha_bar.assign(count + 1, 1.0);
  s.model_t.assign(count + 1, 0);
  for (std::size_t i = 1; i <= count; ++i) {
    const std::size_t t = (i * base.steps + count - 1) / count;
    s.model_t[i] = base.model_t[t];
    s.alpha_bar[i] = base.alpha_bar[t];
    s.alpha[i] = s.alpha_bar[i] / s.alpha_bar[i - 1];
    s.beta[i] = 1.0 - s.alpha[i];
  }
  fill_sigma(s);
  return s;
}

Tensor q_sample(const Tensor& m0, std::size_t t, const Tensor& eps, const NoiseSchedule& s) {
  require_step(s, t, 0, "q_sample");
  numcore::require_same_shape(m0, eps, "q_sample");
  const double a = std::sqrt(s.alpha_bar[t]);
  const double b = std::sqrt(1.0 - s.alpha_bar[t]);
  Tensor out(m0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * m0[i] + b * eps[i];
  if (!out.all_finite()) throw NumericalError("q_sample: non-finite result at t = " + std::to_string(t));
  return out;
}

Tensor standard_normal(numcore::Shape shape, numcore::Rng& rng) {
  Tensor out(std::move(shape));
  for (auto& v : out.data()) v = rng.normal();
  return out;
}

Tensor init_edge_noise(std::size_t parts, numcore::Rng& rng) {
  if (parts < 2) throw InvalidArgument("init_edge_noise: need at least 2 parts");
  const std::size_t pairs = parts * (parts - 1) / 2;
  Tensor out = standard_normal(numcore::Shape{pairs, artgraph::kEdgeDim}, rng);
  for (std::size_t r = 0; r < pairs; ++r) out(r, artgraph::kColChirality) += rng.sign();
  return out;
}

Tensor denoise_step(const Tensor& m_t, std::size_t t, const Tensor& eps, const Tensor& z, const NoiseSchedule& s) {
  require_step(s, t, 1, "denoise_step");
  numcore::require_same_shape(m_t, eps, "denoise_step");
  numcore::require_same_shape(m_t, z, "denoise_step");
  const double inv = 1.0 / std::sqrt(s.alpha[t]);
  const double coef = (1.0 - s.alpha[t]) / std::sqrt(1.0 - s.alpha_bar[t]);
  Tensor out(m_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv * (m_t[i] - coef * eps[i]) + s.sigma[t] * z[i];
  if (!out.all_finite()) throw NumericalError("denoise_step: non-finite result at t = " + std::to_string(t));
  return out;
}

}  // namespace artigen::jointdiff
