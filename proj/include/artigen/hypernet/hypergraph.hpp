#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "artigen/numcore/rng.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::hypernet {

using numcore::Tensor;

struct KMeansResult {
  Tensor centroids;                     // C x d
  std::vector<std::size_t> assignment;  // per input row
  std::vector<double> inertia;          // after seeding, then after each Lloyd iteration
  std::size_t iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Nearest-centroid ties go to the
// lowest index; an empty cluster is moved onto the point farthest from its
// current centroid. Stops after `max_iters` or when the relative inertia
// change drops below `tol`. Throws InvalidArgument when N < C.
KMeansResult kmeans(const Tensor& vectors, std::size_t clusters, numcore::Rng& rng, std::size_t max_iters = 100,
                    double tol = 1e-6);

struct Hypergraph {
  Tensor incidence;  // N x E, entries 0 or 1
  std::vector<double> weights;
  std::vector<double> vertex_degree;  // d(v) = sum_e w_e H(v, e)
  std::vector<double> edge_degree;    // delta(e) = sum_v H(v, e)
  // One row per hyperedge: the centroid whose neighborhood defines it.
  Tensor centroids;
  std::size_t knn = 0;

  std::size_t vertex_count() const { return incidence.rows(); }
  std::size_t edge_count() const { return incidence.cols(); }
};

// Builds degrees from an explicit incidence and weight vector. Throws
// ValidationError when a vertex or hyperedge is empty, an entry is not 0/1,
// or a weight is not positive.
Hypergraph make_hypergraph(Tensor incidence, std::vector<double> weights);

// One hyperedge per centroid; vertex v joins the hyperedges of its `knn`
// nearest centroids (ties to the lower index). Hyperedges nobody joined are
// dropped together with their centroid. All-identical vectors collapse to a
// single hyperedge holding every vertex.
Hypergraph build_hypergraph(const Tensor& vectors, const Tensor& centroids, std::size_t knn = 4);

// Copy of `hg` with `query` appended as vertex N, attached to the hyperedges
// of its knn nearest centroids.
Hypergraph with_query(const Hypergraph& hg, std::span<const double> query);

// S = Dv^-1/2 H W De^-1 H^T Dv^-1/2, dense N x N.
Tensor propagation_operator(const Hypergraph& hg);

// relu(S X theta) when `hidden`, S X theta otherwise.
Tensor hgnn_layer(const Tensor& x, const Hypergraph& hg, const Tensor& theta, bool hidden);

// Hypergraph cache: the hypergraph plus the standardized vectors it was built
// from and the standardization statistics.
struct HypergraphCache {
  Hypergraph graph;
  Tensor vectors;  // N x d, standardized
  Tensor mean;     // 1 x d
  Tensor scale;    // 1 x d
};

void save_hypergraph(const std::filesystem::path& path, const HypergraphCache& cache);
HypergraphCache load_hypergraph(const std::filesystem::path& path);

}  // namespace artigen::hypernet
