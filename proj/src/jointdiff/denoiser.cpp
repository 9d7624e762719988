#include "artigen/jointdiff/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "artigen/artgraph/graph.hpp"
#include "artigen/error.hpp"

namespace artigen::jointdiff {

namespace {

using artgraph::kEdgeDim;
using artgraph::kMaxParts;
using artgraph::kVertexDim;
using numcore::Shape;
using numcore::Tape;
using numcore::Var;

constexpr std::size_t kInputDim = kEdgeDim + 2 * kVertexDim + kTimeEmbedDim;

std::size_t parts_for_pairs(std::size_t pairs) {
  for (std::size_t k = 2; k <= kMaxParts; ++k) {
    if (k * (k - 1) / 2 == pairs) return k;
  }
  throw ShapeError("edge matrix with " + std::to_string(pairs) + " rows matches no part count");
}

void require_example(const Tensor& edges, const Tensor& vertices) {
  if (edges.rank() != 2 || edges.cols() != kEdgeDim) {
    throw ShapeError("edge matrix must be pairs x " + std::to_string(kEdgeDim) + ", got " +
                     numcore::shape_string(edges.shape()));
  }
  const std::size_t k = parts_for_pairs(edges.rows());
  if (vertices.shape() != Shape{k, kVertexDim}) {
    throw ShapeError("vertex matrix " + numcore::shape_string(vertices.shape()) + " does not match " +
                     std::to_string(edges.rows()) + " edge rows");
  }
}

void write_row(const Tensor& edges, const Tensor& vertices, const std::vector<double>& temb, std::size_t row,
               Tensor& out, std::size_t out_row) {
  const std::size_t k = vertices.rows();
  double* dst = out.data().data() + out_row * kInputDim;
  // Pair (i, j) of `row` in lexicographic order over k parts.
  std::size_t i = 0, r = row;
  while (r >= k - 1 - i) {
    r -= k - 1 - i;
    ++i;
  }
  const std::size_t j = i + 1 + r;
  std::copy_n(edges.data().begin() + static_cast<std::ptrdiff_t>(row * kEdgeDim), kEdgeDim, dst);
  std::copy_n(vertices.data().begin() + static_cast<std::ptrdiff_t>(i * kVertexDim), kVertexDim, dst + kEdgeDim);
  std::copy_n(vertices.data().begin() + static_cast<std::ptrdiff_t>(j * kVertexDim), kVertexDim,
              dst + kEdgeDim + kVertexDim);
  std::copy(temb.begin(), temb.end(), dst + kEdgeDim + 2 * kVertexDim);
}

}  // namespace

std::vector<double> timestep_embedding(std::size_t t) {
  constexpr std::size_t half = kTimeEmbedDim / 2;
  std::vector<double> out(kTimeEmbedDim);
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    out[2 * i] = std::sin(static_cast<double>(t) * freq);
    out[2 * i + 1] = std::cos(static_cast<double>(t) * freq);
  }
  return out;
}

numcore::ParamSet init_denoiser(const DenoiserConfig& cfg, numcore::Rng& rng) {
  if (cfg.hidden == 0) throw InvalidArgument("init_denoiser: hidden width must be positive");
  numcore::ParamSet p;
  p.add("eps.0.w", numcore::glorot(kInputDim, cfg.hidden, rng));
  p.add("eps.0.b", Tensor(Shape{1, cfg.hidden}));
  p.add("eps.1.w", numcore::glorot(cfg.hidden, cfg.hidden, rng));
  p.add("eps.1.b", Tensor(Shape{1, cfg.hidden}));
  p.add("eps.2.w", numcore::glorot(cfg.hidden, kEdgeDim, rng));
  p.add("eps.2.b", Tensor(Shape{1, kEdgeDim}));
  return p;
}

Tensor denoiser_input(const Tensor& edges, const Tensor& vertices, std::size_t t) {
  require_example(edges, vertices);
  Tensor out(Shape{edges.rows(), kInputDim});
  const auto temb = timestep_embedding(t);
  for (std::size_t r = 0; r < edges.rows(); ++r) write_row(edges, vertices, temb, r, out, r);
  return out;
}

Var predict_noise(Tape& tape, const numcore::ParamSet& params, const Tensor& inputs) {
  if (inputs.rank() != 2 || inputs.cols() != kInputDim) {
    throw ShapeError("denoiser input must be rows x " + std::to_string(kInputDim) + ", got " +
                     numcore::shape_string(inputs.shape()));
  }
  Var h = tape.constant(inputs);
  h = numcore::relu(numcore::affine(h, tape.param(params, "eps.0.w"), tape.param(params, "eps.0.b")));
  h = numcore::relu(numcore::affine(h, tape.param(params, "eps.1.w"), tape.param(params, "eps.1.b")));
  return numcore::affine(h, tape.param(params, "eps.2.w"), tape.param(params, "eps.2.b"));
}

Tensor predict_noise(const numcore::ParamSet& params, const Tensor& edges, const Tensor& vertices, std::size_t t) {
  Tape tape(false);
  return predict_noise(tape, params, denoiser_input(edges, vertices, t)).value();
}

Tensor denoise_step(const Tensor& m_t, std::size_t t, const Tensor& vertices, const numcore::ParamSet& params,
                    const Tensor& z, const NoiseSchedule& s) {
  if (t < 1 || t > s.steps) throw InvalidArgument("denoise_step: t = " + std::to_string(t) + " outside schedule");
  return denoise_step(m_t, t, predict_noise(params, m_t, vertices, s.model_t[t]), z, s);
}

SampleResult sample_edges(const Tensor& vertices, const numcore::ParamSet& params, const NoiseSchedule& s,
                          numcore::Rng& rng, bool trace) {
  if (vertices.rank() != 2 || vertices.cols() != kVertexDim || vertices.rows() < 2) {
    throw ShapeError("sample_edges: vertex matrix must be K x " + std::to_string(kVertexDim) + ", got " +
                     numcore::shape_string(vertices.shape()));
  }
  SampleResult out;
  Tensor m = init_edge_noise(vertices.rows(), rng);
  auto record = [&](std::size_t t) {
    if (!trace) return;
    TraceEntry e{t, 0.0, 0.0};
    for (double v : m.data()) {
      e.mean_abs += std::abs(v);
      e.max_abs = std::max(e.max_abs, std::abs(v));
    }
    e.mean_abs /= static_cast<double>(m.size());
    out.trace.push_back(e);
  };
  record(s.steps);
  for (std::size_t t = s.steps; t >= 1; --t) {
    const Tensor z = t > 1 ? standard_normal(m.shape(), rng) : Tensor(m.shape());
    try {
      m = denoise_step(m, t, vertices, params, z, s);
    } catch (const NumericalError& e) {
      throw NumericalError("sample_edges: t = " + std::to_string(t) + ": " + e.what());
    }
    if (!m.all_finite()) throw NumericalError("sample_edges: non-finite state at t = " + std::to_string(t));
    record(t - 1);
  }
  out.edges = std::move(m);
  return out;
}

Var denoiser_loss(Tape& tape, const numcore::ParamSet& params, const std::vector<DiffusionExample>& batch,
                  const std::vector<std::size_t>& ts, const std::vector<Tensor>& eps, const NoiseSchedule& s) {
  if (batch.empty() || ts.size() != batch.size() || eps.size() != batch.size()) {
    throw InvalidArgument("denoiser_loss: batch, timesteps and noise must have the same non-zero length");
  }
  const std::size_t pairs = batch.front().edges.rows();
  Tensor inputs(Shape{batch.size() * pairs, kInputDim});
  Tensor target(Shape{batch.size() * pairs, kEdgeDim});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    require_example(batch[b].edges, batch[b].vertices);
    if (batch[b].edges.rows() != pairs) throw ShapeError("denoiser_loss: examples differ in pair count");
    const Tensor m_t = q_sample(batch[b].edges, ts[b], eps[b], s);
    const auto temb = timestep_embedding(s.model_t[ts[b]]);
    for (std::size_t r = 0; r < pairs; ++r) write_row(m_t, batch[b].vertices, temb, r, inputs, b * pairs + r);
    std::copy(eps[b].data().begin(), eps[b].data().end(),
              target.data().begin() + static_cast<std::ptrdiff_t>(b * pairs * kEdgeDim));
  }
  return numcore::mse(predict_noise(tape, params, inputs), target);
}

void run_denoiser(const std::vector<DiffusionExample>& data, const DiffusionConfig& cfg, numcore::TrainState& state,
                  const StepCallback& on_step) {
  if (data.empty()) throw InvalidArgument("train_denoiser: empty dataset");
  if (cfg.batch == 0) throw InvalidArgument("train_denoiser: batch must be positive");
  for (const auto& ex : data) require_example(ex.edges, ex.vertices);
  const NoiseSchedule s = make_schedule(cfg.T, cfg.beta_1, cfg.beta_T, cfg.sigma);
  const std::size_t bsz = std::min(cfg.batch, data.size());
  const std::size_t steps_per_epoch = (data.size() + bsz - 1) / bsz;

  while (state.iteration < cfg.iterations) {
    const auto idx = numcore::sample_indices(data.size(), bsz, state.rng);
    std::vector<DiffusionExample> batch;
    std::vector<std::size_t> ts;
    std::vector<Tensor> eps;
    for (auto i : idx) {
      batch.push_back(data[i]);
      ts.push_back(1 + state.rng.below(s.steps));
      eps.push_back(standard_normal(data[i].edges.shape(), state.rng));
    }
    Tape tape;
    double value = 0.0;
    numcore::Gradients grads;
    try {
      Var loss = denoiser_loss(tape, state.params, batch, ts, eps, s);
      value = loss.value().item();
      grads = tape.backward(loss, state.params);
    } catch (const NumericalError& e) {
      throw NumericalError("train_denoiser: iteration " + std::to_string(state.iteration + 1) + ": " + e.what());
    }
    if (!std::isfinite(value)) {
      throw NumericalError("train_denoiser: non-finite loss at iteration " + std::to_string(state.iteration + 1));
    }
    const double lr = numcore::lr_at(state.iteration / steps_per_epoch, cfg.lr, cfg.lr_period, cfg.lr_gamma);
    numcore::adam_step(state.params, grads, lr);
    state.losses.push_back(value);
    ++state.iteration;
    if (on_step) on_step(state);
  }
}

DenoiserResult train_denoiser(const std::vector<DiffusionExample>& data, const DiffusionConfig& cfg,
                              numcore::Rng& rng) {
  numcore::TrainState state;
  state.params = init_denoiser(cfg.net, rng);
  state.rng = rng.split(1);
  run_denoiser(data, cfg, state);
  return {std::move(state.params), std::move(state.losses)};
}

}  // namespace artigen::jointdiff
