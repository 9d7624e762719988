#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "artigen/artgraph/graph.hpp"
#include "artigen/artgraph/ops.hpp"
#include "artigen/numcore/rng.hpp"

namespace artigen::checks {

// Brute force over every (n-1)-subset of the complete graph's edges. The
// winner minimizes total weight, then the sum of lexicographic edge ranks,
// which is the unique tree Kruskal yields under (weight, i, j) ordering.
struct TreeOracle {
  std::vector<artgraph::Pair> best;
  std::size_t spanning_trees = 0;
};

inline TreeOracle exhaustive_min_tree(std::size_t n, const std::vector<artgraph::WeightedPair>& edges) {
  std::vector<int> rank(edges.size());
  {
    std::vector<std::size_t> order(edges.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return std::pair(edges[a].i, edges[a].j) < std::pair(edges[b].i, edges[b].j); });
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = static_cast<int>(k);
  }
  TreeOracle out;
  std::optional<std::pair<double, int>> best_key;
  const std::size_t m = edges.size();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) + 1 != n) continue;
    std::vector<std::size_t> label(n);
    for (std::size_t k = 0; k < n; ++k) label[k] = k;
    bool acyclic = true;
    double total = 0.0;
    int rank_sum = 0;
    std::vector<artgraph::Pair> tree;
    for (std::size_t e = 0; e < m && acyclic; ++e) {
      if (!(mask & (1u << e))) continue;
      const std::size_t a = label[edges[e].i], b = label[edges[e].j];
      if (a == b) {
        acyclic = false;
        break;
      }
      for (auto& l : label) {
        if (l == b) l = a;
      }
      total += edges[e].weight;
      rank_sum += rank[e];
      tree.emplace_back(edges[e].i, edges[e].j);
    }
    if (!acyclic) continue;
    ++out.spanning_trees;
    const std::pair<double, int> key{total, rank_sum};
    const bool better = !best_key || key.first < best_key->first - 1e-12 ||
                        (std::abs(key.first - best_key->first) <= 1e-12 && key.second < best_key->second);
    if (better) {
      best_key = key;
      std::sort(tree.begin(), tree.end());
      out.best = tree;
    }
  }
  return out;
}

// Complete graph on nodes 0..n-1. Even instances use continuous weights, odd
// instances draw from {0, 0.25, ..., 1} so that ties are common.
inline std::vector<artgraph::WeightedPair> random_complete_graph(std::size_t n, numcore::Rng& rng, bool discrete) {
  std::vector<artgraph::WeightedPair> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = discrete ? 0.25 * static_cast<double>(rng.below(5)) : rng.uniform();
      edges.push_back({i, j, w});
    }
  }
  return edges;
}

}  // namespace artigen::checks
