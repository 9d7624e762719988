#include "artigen/hypernet/extractor.hpp"

#include <algorithm>
#include <cmath>

#include "artigen/artgraph/graph.hpp"
#include "artigen/error.hpp"

namespace artigen::hypernet {

namespace {

using artgraph::kColExists;
using artgraph::kColExtents;
using artgraph::kMaxParts;
using artgraph::kVertexDim;
using numcore::Shape;
using numcore::Tape;
using numcore::Var;

void require_targets(const std::vector<Tensor>& targets, std::size_t n) {
  if (targets.size() != n) {
    throw InvalidArgument("extractor: " + std::to_string(targets.size()) + " targets for " + std::to_string(n) +
                          " vectors");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i].shape() != Shape{kMaxParts, kVertexDim}) {
      throw ShapeError("extractor: target " + std::to_string(i) + " has shape " +
                       numcore::shape_string(targets[i].shape()));
    }
  }
}

// Network output for the rows of `ps` (rows of the propagation operator),
// stacked slot-major: row k * B + b is slot k of query b.
Var forward(Tape& tape, const numcore::ParamSet& p, const Tensor& sx, const Tensor& ps) {
  Var h1 = numcore::relu(numcore::matmul(tape.constant(sx), tape.param(p, "hgnn.0.theta")));
  Var z = numcore::matmul(numcore::matmul(tape.constant(ps), h1), tape.param(p, "hgnn.1.theta"));
  Var a = numcore::relu(numcore::affine(z, tape.param(p, "head.0.w"), tape.param(p, "head.0.b")));
  Var w = tape.param(p, "head.1.w");
  Var b = tape.param(p, "head.1.b");
  std::vector<Var> slots;
  slots.reserve(kMaxParts);
  for (std::size_t k = 0; k < kMaxParts; ++k) {
    const std::size_t lo = k * kVertexDim, hi = lo + kVertexDim;
    slots.push_back(numcore::affine(a, numcore::slice(w, 1, lo, hi), numcore::slice(b, 1, lo, hi)));
  }
  return numcore::concat(slots, 0);
}

Tensor stack_targets(const std::vector<Tensor>& targets, const std::vector<std::size_t>& batch) {
  const std::size_t bsz = batch.size();
  Tensor gt(Shape{kMaxParts * bsz, kVertexDim});
  for (std::size_t b = 0; b < bsz; ++b) {
    const Tensor& t = targets[batch[b]];
    for (std::size_t k = 0; k < kMaxParts; ++k) {
      std::copy_n(t.data().begin() + static_cast<std::ptrdiff_t>(k * kVertexDim), kVertexDim,
                  gt.data().begin() + static_cast<std::ptrdiff_t>((k * bsz + b) * kVertexDim));
    }
  }
  return gt;
}

}  // namespace

TracedLoss loss_hg(const Var& pred, const Tensor& gt, const LossWeights& w) {
  numcore::require_same_shape(pred.value(), gt, "loss_hg");
  if (gt.rank() != 2 || gt.cols() != kVertexDim || gt.rows() % kMaxParts != 0 || gt.rows() == 0) {
    throw ShapeError("loss_hg: expected stacked " + std::to_string(kMaxParts) + "x" + std::to_string(kVertexDim) +
                     " blocks, got " + numcore::shape_string(gt.shape()));
  }
  Tape& tape = pred.tape();
  Var g = tape.constant(gt);
  TracedLoss out;
  out.matrix = numcore::mse(pred, g);
  Var b_err = numcore::mse(numcore::slice(pred, 1, kColExtents, kColExtents + 3),
                           numcore::slice(g, 1, kColExtents, kColExtents + 3));
  Var o_pred = numcore::slice(pred, 1, kColExists, kColExists + 1);
  Var o_gt = numcore::slice(g, 1, kColExists, kColExists + 1);
  out.bbox = numcore::scale(numcore::add(b_err, numcore::mse(o_pred, o_gt)), static_cast<double>(kMaxParts));
  out.exist = numcore::mse(numcore::mul(numcore::broadcast(o_pred, gt.shape()), pred),
                           numcore::mul(numcore::broadcast(o_gt, gt.shape()), g));
  out.total = numcore::add(numcore::add(numcore::scale(out.matrix, w.matrix), numcore::scale(out.bbox, w.bbox)),
                           numcore::scale(out.exist, w.exist));
  return out;
}

LossBreakdown loss_hg(const Tensor& pred, const Tensor& gt, const LossWeights& w) {
  Tape tape(false);
  const auto l = loss_hg(tape.constant(pred), gt, w);
  return {l.matrix.value().item(), l.bbox.value().item(), l.exist.value().item(), l.total.value().item()};
}

HypergraphCache prepare_context(const Tensor& vectors, const ExtractorConfig& cfg, numcore::Rng& rng) {
  if (vectors.rank() != 2 || vectors.rows() == 0) {
    throw InvalidArgument("prepare_context: need a non-empty N x d matrix, got " +
                          numcore::shape_string(vectors.shape()));
  }
  const std::size_t n = vectors.rows(), d = vectors.cols();
  HypergraphCache cache;
  cache.mean = Tensor(Shape{1, d});
  cache.scale = Tensor(Shape{1, d});
  for (std::size_t k = 0; k < d; ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += vectors(i, k);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (vectors(i, k) - m) * (vectors(i, k) - m);
    const double s = std::sqrt(v / static_cast<double>(n));
    cache.mean(0, k) = m;
    cache.scale(0, k) = s > 1e-12 ? s : 1.0;
  }
  cache.vectors = Tensor(Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) cache.vectors(i, k) = (vectors(i, k) - cache.mean(0, k)) / cache.scale(0, k);
  }
  const auto clusters = kmeans(cache.vectors, cfg.clusters, rng, cfg.kmeans_iters);
  cache.graph = build_hypergraph(cache.vectors, clusters.centroids, cfg.knn);
  return cache;
}

numcore::ParamSet init_extractor_params(std::size_t dim, const std::vector<Tensor>& targets,
                                        const ExtractorConfig& cfg, numcore::Rng& rng) {
  if (targets.empty()) throw InvalidArgument("init_extractor_params: no targets");
  require_targets(targets, targets.size());
  const std::size_t out = kMaxParts * kVertexDim;
  numcore::ParamSet p;
  p.add("hgnn.0.theta", numcore::glorot(dim, dim, rng));
  p.add("hgnn.1.theta", numcore::glorot(dim, cfg.hidden, rng));
  p.add("head.0.w", numcore::glorot(cfg.hidden, cfg.hidden, rng));
  p.add("head.0.b", Tensor(Shape{1, cfg.hidden}));
  p.add("head.1.w", numcore::glorot(cfg.hidden, out, rng));
  Tensor bias(Shape{1, out});
  for (const auto& t : targets) {
    for (std::size_t i = 0; i < out; ++i) bias[i] += t[i];
  }
  for (auto& v : bias.data()) v /= static_cast<double>(targets.size());
  p.add("head.1.b", std::move(bias));
  return p;
}

void run_extractor(const HypergraphCache& context, const std::vector<Tensor>& targets, const ExtractorConfig& cfg,
                   numcore::TrainState& state, const StepCallback& on_step) {
  const std::size_t n = context.vectors.rows();
  if (n == 0) throw InvalidArgument("train_extractor: empty dataset");
  if (cfg.batch == 0) throw InvalidArgument("train_extractor: batch must be positive");
  require_targets(targets, n);

  const Tensor s = propagation_operator(context.graph);
  const Tensor sx = numcore::matmul(s, context.vectors);
  const std::size_t bsz = std::min(cfg.batch, n);
  const std::size_t steps_per_epoch = (n + bsz - 1) / bsz;

  while (state.iteration < cfg.iterations) {
    const auto batch = numcore::sample_indices(n, bsz, state.rng);
    Tensor ps(Shape{bsz, n});
    for (std::size_t b = 0; b < bsz; ++b) {
      std::copy_n(s.data().begin() + static_cast<std::ptrdiff_t>(batch[b] * n), n,
                  ps.data().begin() + static_cast<std::ptrdiff_t>(b * n));
    }
    const Tensor gt = stack_targets(targets, batch);

    Tape tape;
    double value = 0.0;
    numcore::Gradients grads;
    try {
      Var loss = loss_hg(forward(tape, state.params, sx, ps), gt, cfg.weights).total;
      value = loss.value().item();
      grads = tape.backward(loss, state.params);
    } catch (const NumericalError& e) {
      throw NumericalError("train_extractor: iteration " + std::to_string(state.iteration + 1) + ": " + e.what());
    }
    if (!std::isfinite(value)) {
      throw NumericalError("train_extractor: non-finite loss at iteration " + std::to_string(state.iteration + 1));
    }
    const double lr = numcore::lr_at(state.iteration / steps_per_epoch, cfg.lr, cfg.lr_period, cfg.lr_gamma);
    numcore::adam_step(state.params, grads, lr);
    state.losses.push_back(value);
    ++state.iteration;
    if (on_step) on_step(state);
  }
}

ExtractorResult train_extractor(const Tensor& vectors, const std::vector<Tensor>& targets,
                                const ExtractorConfig& cfg, numcore::Rng& rng) {
  if (vectors.rank() != 2 || vectors.rows() == 0) throw InvalidArgument("train_extractor: empty dataset");
  require_targets(targets, vectors.rows());
  ExtractorResult out;
  out.model.context = prepare_context(vectors, cfg, rng);
  numcore::TrainState state;
  state.params = init_extractor_params(vectors.cols(), targets, cfg, rng);
  state.rng = rng.split(1);
  run_extractor(out.model.context, targets, cfg, state);
  out.model.params = std::move(state.params);
  out.losses = std::move(state.losses);
  return out;
}

Tensor extract_vertices(std::span<const double> query, const ExtractorModel& model) {
  const auto& ctx = model.context;
  const std::size_t n = ctx.vectors.rows(), d = ctx.vectors.cols();
  if (query.size() != d) {
    throw ShapeError("extract_vertices: query has " + std::to_string(query.size()) + " values, expected " +
                     std::to_string(d));
  }
  std::vector<double> q(d);
  for (std::size_t k = 0; k < d; ++k) q[k] = (query[k] - ctx.mean(0, k)) / ctx.scale(0, k);

  const Hypergraph hg = with_query(ctx.graph, q);
  const Tensor s = propagation_operator(hg);
  Tensor x(Shape{n + 1, d});
  std::copy(ctx.vectors.data().begin(), ctx.vectors.data().end(), x.data().begin());
  std::copy(q.begin(), q.end(), x.data().begin() + static_cast<std::ptrdiff_t>(n * d));
  const Tensor sx = numcore::matmul(s, x);
  const Tensor ps = numcore::slice(s, 0, n, n + 1);

  Tape tape(false);
  Tensor out = forward(tape, model.params, sx, ps).value();
  if (!out.all_finite()) throw NumericalError("extract_vertices: non-finite output");
  return out;
}

}  // namespace artigen::hypernet
