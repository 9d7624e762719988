#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "artigen/hypernet/hypergraph.hpp"
#include "artigen/numcore/autodiff.hpp"
#include "artigen/numcore/params.hpp"
#include "artigen/numcore/train_state.hpp"

namespace artigen::hypernet {

struct LossWeights {
  double matrix = 0.4;
  double bbox = 0.4;
  double exist = 1.0;
};

struct LossBreakdown {
  double matrix = 0.0;
  double bbox = 0.0;
  double exist = 0.0;
  double total = 0.0;
};

struct TracedLoss {
  numcore::Var matrix, bbox, exist, total;
};

// Composite vertex-matrix loss over stacked K x D_v blocks (rows = B * K, the
// batch mean of the per-object loss):
//   matrix = MSE over everything
//   bbox   = sum over slots of MSE(b) + (o - o')^2
//   exist  = MSE(o * M_v, o' * M_v') with o gating its whole row
TracedLoss loss_hg(const numcore::Var& pred, const Tensor& gt, const LossWeights& w = {});
LossBreakdown loss_hg(const Tensor& pred, const Tensor& gt, const LossWeights& w = {});

struct ExtractorConfig {
  std::size_t clusters = 64;
  std::size_t knn = 4;
  std::size_t hidden = 256;
  std::size_t iterations = 3000;
  std::size_t batch = 64;
  double lr = 1e-4;
  std::size_t lr_period = 20;
  double lr_gamma = 0.7;
  LossWeights weights;
  std::size_t kmeans_iters = 100;
};

// Two hypergraph convolutions (d -> d relu, d -> hidden linear) followed by a
// hidden -> hidden relu layer and a linear layer emitting K x D_v.
struct ExtractorModel {
  numcore::ParamSet params;
  HypergraphCache context;
};

// Standardizes the vectors feature-wise, clusters them and builds the
// dataset hypergraph.
HypergraphCache prepare_context(const Tensor& vectors, const ExtractorConfig& cfg, numcore::Rng& rng);

// Fresh parameters; the output bias starts at the mean of `targets`.
numcore::ParamSet init_extractor_params(std::size_t dim, const std::vector<Tensor>& targets,
                                        const ExtractorConfig& cfg, numcore::Rng& rng);

using StepCallback = std::function<void(const numcore::TrainState&)>;

// Runs Adam from state.iteration up to cfg.iterations. The learning rate
// steps once per epoch (ceil(N / B) iterations). Throws NumericalError
// naming the iteration on a non-finite loss.
void run_extractor(const HypergraphCache& context, const std::vector<Tensor>& targets, const ExtractorConfig& cfg,
                   numcore::TrainState& state, const StepCallback& on_step = {});

struct ExtractorResult {
  ExtractorModel model;
  std::vector<double> losses;
};
ExtractorResult train_extractor(const Tensor& vectors, const std::vector<Tensor>& targets,
                                const ExtractorConfig& cfg, numcore::Rng& rng);

// Appends `query` (a raw pattern vector) to the dataset hypergraph, runs the
// network over the augmented vertex set and returns the query's K x D_v rows.
Tensor extract_vertices(std::span<const double> query, const ExtractorModel& model);

}  // namespace artigen::hypernet
