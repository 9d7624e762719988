#pragma once

#include <cstddef>
#include <vector>

#include "artigen/numcore/rng.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::jointdiff {

using numcore::Tensor;

enum class SigmaRule {
  kBeta,       // sigma_t^2 = beta_t
  kPosterior,  // sigma_t^2 = beta_t (1 - abar_{t-1}) / (1 - abar_t)
};

// Tables indexed 0..T. Index 0 holds the convention abar_0 = 1, beta_0 = 0.
struct NoiseSchedule {
  std::size_t steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> sigma;
  // Timestep the denoiser sees at each index. Identity for a full schedule;
  // the original timesteps for a respaced one.
  std::vector<std::size_t> model_t;
  SigmaRule rule = SigmaRule::kBeta;
};

// Linear beta from beta_1 to beta_T. Throws InvalidArgument unless T >= 1 and
// 0 < beta_1 <= beta_T < 1.
NoiseSchedule make_schedule(std::size_t T = 1000, double beta_1 = 1e-4, double beta_T = 2e-2,
                            SigmaRule rule = SigmaRule::kBeta);

// Subsequence of `count` evenly spaced timesteps ending at T, with betas
// recomputed so the cumulative products match the base schedule at the kept
// timesteps.
NoiseSchedule respace(const NoiseSchedule& base, std::size_t count);

// sqrt(abar_t) m0 + sqrt(1 - abar_t) eps, for 0 <= t <= T.
Tensor q_sample(const Tensor& m0, std::size_t t, const Tensor& eps, const NoiseSchedule& s);

// Standard normal pairs x edge-dim matrix with a random +-1 added to column 0
// of every row.
Tensor init_edge_noise(std::size_t parts, numcore::Rng& rng);

// Reverse step
//   M_{t-1} = (M_t - (1 - alpha_t) / sqrt(1 - abar_t) eps) / sqrt(alpha_t) + sigma_t z
Tensor denoise_step(const Tensor& m_t, std::size_t t, const Tensor& eps, const Tensor& z, const NoiseSchedule& s);

Tensor standard_normal(numcore::Shape shape, numcore::Rng& rng);

}  // namespace artigen::jointdiff
