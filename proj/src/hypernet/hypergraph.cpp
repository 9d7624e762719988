#include "artigen/hypernet/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "artigen/error.hpp"
#include "artigen/numcore/binary_io.hpp"

namespace artigen::hypernet {

namespace {

constexpr char kCacheMagic[] = "ARTGHGPH";
constexpr int kCacheVersion = 1;

double dist2(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

const double* row(const Tensor& t, std::size_t r) { return t.data().data() + r * t.cols(); }

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(what) + ": expected a matrix, got " + numcore::shape_string(t.shape()));
  }
}

// Indices of the `k` rows of `centroids` nearest to `v`, nearest first.
std::vector<std::size_t> nearest(const Tensor& centroids, const double* v, std::size_t k) {
  const std::size_t e = centroids.rows();
  std::vector<std::pair<double, std::size_t>> d(e);
  for (std::size_t c = 0; c < e; ++c) d[c] = {dist2(row(centroids, c), v, centroids.cols()), c};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

double assign(const Tensor& x, const Tensor& centroids, std::vector<std::size_t>& assignment,
              std::vector<double>& best) {
  const std::size_t n = x.rows(), c = centroids.rows(), d = x.cols();
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double b = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < c; ++j) {
      const double v = dist2(row(x, i), row(centroids, j), d);
      if (v < b) {
        b = v;
        arg = j;
      }
    }
    assignment[i] = arg;
    best[i] = b;
    inertia += b;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Tensor& vectors, std::size_t clusters, numcore::Rng& rng, std::size_t max_iters,
                    double tol) {
  require_matrix(vectors, "kmeans");
  const std::size_t n = vectors.rows(), d = vectors.cols();
  if (clusters == 0) throw InvalidArgument("kmeans: need at least one cluster");
  if (n < clusters) {
    throw InvalidArgument("kmeans: " + std::to_string(n) + " vectors cannot form " + std::to_string(clusters) +
                          " clusters");
  }
  if (!vectors.all_finite()) throw NumericalError("kmeans: non-finite input");

  KMeansResult out;
  out.centroids = Tensor(numcore::Shape{clusters, d});
  auto set_centroid = [&](std::size_t c, std::size_t i) {
    std::copy_n(row(vectors, i), d, out.centroids.data().begin() + static_cast<std::ptrdiff_t>(c * d));
  };

  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < clusters; ++c) {
    if (c > 0) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      if (total > 0.0) {
        const double r = rng.uniform() * total;
        double acc = 0.0;
        pick = n;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          last_positive = i;
          acc += d2[i];
          if (acc > r) {
            pick = i;
            break;
          }
        }
        if (pick == n) pick = last_positive;
      } else {
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
    }
    chosen[pick] = true;
    set_centroid(c, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], dist2(row(vectors, i), row(vectors, pick), d));
  }

  out.assignment.assign(n, 0);
  std::vector<double> best(n);
  out.inertia.push_back(assign(vectors, out.centroids, out.assignment, best));

  for (std::size_t it = 0; it < max_iters; ++it) {
    Tensor sums(numcore::Shape{clusters, d});
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = out.assignment[i];
      ++counts[c];
      for (std::size_t k = 0; k < d; ++k) sums(c, k) += vectors(i, k);
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] > 0) {
        for (std::size_t k = 0; k < d; ++k) out.centroids(c, k) = sums(c, k) / static_cast<double>(counts[c]);
        continue;
      }
      const auto far = static_cast<std::size_t>(std::max_element(best.begin(), best.end()) - best.begin());
      set_centroid(c, far);
      best[far] = 0.0;
    }
    const double prev = out.inertia.back();
    const double cur = assign(vectors, out.centroids, out.assignment, best);
    out.inertia.push_back(cur);
    out.iterations = it + 1;
    if (prev <= 0.0 || std::abs(prev - cur) < tol * prev) break;
  }
  return out;
}

Hypergraph make_hypergraph(Tensor incidence, std::vector<double> weights) {
  require_matrix(incidence, "make_hypergraph");
  const std::size_t n = incidence.rows(), e = incidence.cols();
  if (weights.size() != e) {
    throw ShapeError("make_hypergraph: " + std::to_string(weights.size()) + " weights for " + std::to_string(e) +
                     " hyperedges");
  }
  Hypergraph hg;
  hg.vertex_degree.assign(n, 0.0);
  hg.edge_degree.assign(e, 0.0);
  for (std::size_t j = 0; j < e; ++j) {
    if (!(weights[j] > 0.0) || !std::isfinite(weights[j])) {
      throw ValidationError("hyperedge " + std::to_string(j) + ": weight must be positive");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < e; ++j) {
      const double h = incidence(i, j);
      if (h != 0.0 && h != 1.0) {
        throw ValidationError("incidence entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not 0 or 1");
      }
      hg.vertex_degree[i] += weights[j] * h;
      hg.edge_degree[j] += h;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(hg.vertex_degree[i] > 0.0)) throw ValidationError("vertex " + std::to_string(i) + " is in no hyperedge");
  }
  for (std::size_t j = 0; j < e; ++j) {
    if (!(hg.edge_degree[j] > 0.0)) throw ValidationError("hyperedge " + std::to_string(j) + " is empty");
  }
  hg.incidence = std::move(incidence);
  hg.weights = std::move(weights);
  return hg;
}

Hypergraph build_hypergraph(const Tensor& vectors, const Tensor& centroids, std::size_t knn) {
  require_matrix(vectors, "build_hypergraph");
  require_matrix(centroids, "build_hypergraph");
  if (knn == 0) throw InvalidArgument("build_hypergraph: knn must be at least 1");
  if (vectors.cols() != centroids.cols()) {
    throw ShapeError("build_hypergraph: vectors " + numcore::shape_string(vectors.shape()) + " vs centroids " +
                     numcore::shape_string(centroids.shape()));
  }
  const std::size_t n = vectors.rows(), d = vectors.cols();
  if (n == 0 || centroids.rows() == 0) throw InvalidArgument("build_hypergraph: empty input");

  bool identical = true;
  for (std::size_t i = 1; i < n && identical; ++i) {
    identical = std::equal(row(vectors, i), row(vectors, i) + d, row(vectors, 0));
  }
  if (identical) {
    Hypergraph hg = make_hypergraph(Tensor(numcore::Shape{n, 1}, 1.0), {1.0});
    hg.centroids = Tensor(numcore::Shape{1, d}, std::vector<double>(row(vectors, 0), row(vectors, 0) + d));
    hg.knn = 1;
    return hg;
  }

  const std::size_t e0 = centroids.rows();
  const std::size_t k = std::min(knn, e0);
  std::vector<std::vector<std::size_t>> members(n);
  std::vector<bool> used(e0, false);
  for (std::size_t i = 0; i < n; ++i) {
    members[i] = nearest(centroids, row(vectors, i), k);
    for (auto c : members[i]) used[c] = true;
  }
  std::vector<std::size_t> remap(e0, e0);
  std::vector<double> kept;
  std::size_t e = 0;
  for (std::size_t c = 0; c < e0; ++c) {
    if (!used[c]) continue;
    remap[c] = e++;
    kept.insert(kept.end(), row(centroids, c), row(centroids, c) + d);
  }
  Tensor h(numcore::Shape{n, e});
  for (std::size_t i = 0; i < n; ++i) {
    for (auto c : members[i]) h(i, remap[c]) = 1.0;
  }
  Hypergraph hg = make_hypergraph(std::move(h), std::vector<double>(e, 1.0));
  hg.centroids = Tensor(numcore::Shape{e, d}, std::move(kept));
  hg.knn = knn;
  return hg;
}

Hypergraph with_query(const Hypergraph& hg, std::span<const double> query) {
  const std::size_t n = hg.vertex_count(), e = hg.edge_count();
  if (query.size() != hg.centroids.cols()) {
    throw ShapeError("with_query: query has " + std::to_string(query.size()) + " values, centroids have " +
                     std::to_string(hg.centroids.cols()));
  }
  Tensor h(numcore::Shape{n + 1, e});
  std::copy(hg.incidence.data().begin(), hg.incidence.data().end(), h.data().begin());
  for (auto c : nearest(hg.centroids, query.data(), std::min(std::max<std::size_t>(hg.knn, 1), e))) h(n, c) = 1.0;
  Hypergraph out = make_hypergraph(std::move(h), hg.weights);
  out.centroids = hg.centroids;
  out.knn = hg.knn;
  return out;
}

Tensor propagation_operator(const Hypergraph& hg) {
  const std::size_t n = hg.vertex_count(), e = hg.edge_count();
  Tensor left(numcore::Shape{n, e});
  Tensor right(numcore::Shape{n, e});
  for (std::size_t i = 0; i < n; ++i) {
    if (!(hg.vertex_degree[i] > 0.0)) throw NumericalError("vertex " + std::to_string(i) + " has zero degree");
    const double dv = 1.0 / std::sqrt(hg.vertex_degree[i]);
    for (std::size_t j = 0; j < e; ++j) {
      if (!(hg.edge_degree[j] > 0.0)) throw NumericalError("hyperedge " + std::to_string(j) + " has zero degree");
      right(i, j) = hg.incidence(i, j) * dv;
      left(i, j) = right(i, j) * hg.weights[j] / hg.edge_degree[j];
    }
  }
  return numcore::matmul_nt(left, right);
}

Tensor hgnn_layer(const Tensor& x, const Hypergraph& hg, const Tensor& theta, bool hidden) {
  if (x.rows() != hg.vertex_count()) {
    throw ShapeError("hgnn_layer: features " + numcore::shape_string(x.shape()) + " for " +
                     std::to_string(hg.vertex_count()) + " vertices");
  }
  Tensor out = numcore::matmul(numcore::matmul(propagation_operator(hg), x), theta);
  return hidden ? numcore::relu(out) : out;
}

void save_hypergraph(const std::filesystem::path& path, const HypergraphCache& cache) {
  const auto& hg = cache.graph;
  numcore::BlobFile blob;
  blob.header = {{"format", "artigen-hypergraph"},
                 {"version", kCacheVersion},
                 {"vertices", hg.vertex_count()},
                 {"edges", hg.edge_count()},
                 {"dim", hg.centroids.cols()},
                 {"knn", hg.knn},
                 {"layout", {"incidence", "weights", "centroids", "vectors", "mean", "scale"}}};
  auto append = [&](std::span<const double> v) { blob.payload.insert(blob.payload.end(), v.begin(), v.end()); };
  append(hg.incidence.data());
  append(hg.weights);
  append(hg.centroids.data());
  append(cache.vectors.data());
  append(cache.mean.data());
  append(cache.scale.data());
  numcore::write_blob(path, kCacheMagic, blob);
}

HypergraphCache load_hypergraph(const std::filesystem::path& path) {
  const auto blob = numcore::read_blob(path, kCacheMagic);
  std::size_t n = 0, e = 0, d = 0, knn = 0;
  try {
    if (blob.header.at("version").get<int>() != kCacheVersion) throw IoError(path.string() + ": unsupported version");
    n = blob.header.at("vertices").get<std::size_t>();
    e = blob.header.at("edges").get<std::size_t>();
    d = blob.header.at("dim").get<std::size_t>();
    knn = blob.header.at("knn").get<std::size_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(path.string() + ": bad hypergraph header: " + ex.what());
  }
  const std::size_t expected = n * e + e + e * d + n * d + 2 * d;
  if (blob.payload.size() != expected) {
    throw IoError(path.string() + ": payload has " + std::to_string(blob.payload.size()) + " values, expected " +
                  std::to_string(expected));
  }
  auto it = blob.payload.begin();
  auto take = [&](std::size_t count) {
    std::vector<double> v(it, it + static_cast<std::ptrdiff_t>(count));
    it += static_cast<std::ptrdiff_t>(count);
    return v;
  };
  HypergraphCache cache;
  Tensor h(numcore::Shape{n, e}, take(n * e));
  cache.graph = make_hypergraph(std::move(h), take(e));
  cache.graph.centroids = Tensor(numcore::Shape{e, d}, take(e * d));
  cache.graph.knn = knn;
  cache.vectors = Tensor(numcore::Shape{n, d}, take(n * d));
  cache.mean = Tensor(numcore::Shape{1, d}, take(d));
  cache.scale = Tensor(numcore::Shape{1, d}, take(d));
  return cache;
}

}  // namespace artigen::hypernet
