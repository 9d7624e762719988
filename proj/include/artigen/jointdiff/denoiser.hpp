#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "artigen/jointdiff/schedule.hpp"
#include "artigen/numcore/autodiff.hpp"
#include "artigen/numcore/params.hpp"
#include "artigen/numcore/train_state.hpp"

namespace artigen::jointdiff {

inline constexpr std::size_t kTimeEmbedDim = 32;

// sin/cos pairs at geometric frequencies 10000^(-i/16).
std::vector<double> timestep_embedding(std::size_t t);

struct DenoiserConfig {
  std::size_t hidden = 256;
};

// Per-edge network [edge row, vertex row i, vertex row j, time embedding]
// -> hidden -> hidden -> edge row, relu between layers.
numcore::ParamSet init_denoiser(const DenoiserConfig& cfg, numcore::Rng& rng);

// Network input for a K x D_v vertex matrix and a pairs x D_e edge matrix at
// timestep t: one row per pair.
Tensor denoiser_input(const Tensor& edges, const Tensor& vertices, std::size_t t);

numcore::Var predict_noise(numcore::Tape& tape, const numcore::ParamSet& params, const Tensor& inputs);
// Inference form: predicted noise for every pair of one object.
Tensor predict_noise(const numcore::ParamSet& params, const Tensor& edges, const Tensor& vertices, std::size_t t);

// One reverse step with the network's noise estimate, conditioned on the
// exact vertex rows.
Tensor denoise_step(const Tensor& m_t, std::size_t t, const Tensor& vertices, const numcore::ParamSet& params,
                    const Tensor& z, const NoiseSchedule& s);

struct TraceEntry {
  std::size_t t = 0;
  double mean_abs = 0.0;
  double max_abs = 0.0;
};

struct SampleResult {
  Tensor edges;
  std::vector<TraceEntry> trace;  // one entry per state, starting with the initial noise
};

// Runs the chain from init_edge_noise down to index 0 of `s` (z = 0 on the
// last step). Throws NumericalError naming the timestep if the state stops
// being finite.
SampleResult sample_edges(const Tensor& vertices, const numcore::ParamSet& params, const NoiseSchedule& s,
                          numcore::Rng& rng, bool trace = false);

struct DiffusionConfig {
  std::size_t T = 1000;
  double beta_1 = 1e-4;
  double beta_T = 2e-2;
  SigmaRule sigma = SigmaRule::kBeta;
  std::size_t sample_steps = 100;
  std::size_t iterations = 3000;
  std::size_t batch = 64;
  double lr = 1e-4;
  std::size_t lr_period = 20;
  double lr_gamma = 0.7;
  DenoiserConfig net;
};

struct DiffusionExample {
  Tensor vertices;  // K x D_v
  Tensor edges;     // pairs x D_e
};

// Noise-prediction objective on a fixed minibatch: timesteps `ts` and noise
// `eps` (one entry per example).
numcore::Var denoiser_loss(numcore::Tape& tape, const numcore::ParamSet& params,
                           const std::vector<DiffusionExample>& batch, const std::vector<std::size_t>& ts,
                           const std::vector<Tensor>& eps, const NoiseSchedule& s);

using StepCallback = std::function<void(const numcore::TrainState&)>;

// Adam on the noise-prediction objective from state.iteration to
// cfg.iterations; the learning rate steps once per epoch. Throws
// NumericalError naming the iteration on a non-finite loss.
void run_denoiser(const std::vector<DiffusionExample>& data, const DiffusionConfig& cfg, numcore::TrainState& state,
                  const StepCallback& on_step = {});

struct DenoiserResult {
  numcore::ParamSet params;
  std::vector<double> losses;
};
DenoiserResult train_denoiser(const std::vector<DiffusionExample>& data, const DiffusionConfig& cfg,
                              numcore::Rng& rng);

}  // namespace artigen::jointdiff
