#include "artigen/artgraph/graph.hpp"

#include "artigen/error.hpp"

namespace artigen::artgraph {

std::vector<std::size_t> ArticulationGraph::existing() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kMaxParts; ++i) {
    if (nodes[i].exists) out.push_back(i);
  }
  return out;
}

Pair make_pair_ordered(std::size_t a, std::size_t b) {
  if (a == b || a >= kMaxParts || b >= kMaxParts) {
    throw InvalidArgument("invalid part pair (" + std::to_string(a) + ", " + std::to_string(b) + ")");
  }
  return a < b ? Pair{a, b} : Pair{b, a};
}

void ArticulationGraph::set_edge(std::size_t a, std::size_t b, const EdgeAttr& e) {
  edges[make_pair_ordered(a, b)] = e;
}

const EdgeAttr* ArticulationGraph::edge(std::size_t a, std::size_t b) const {
  auto it = edges.find(make_pair_ordered(a, b));
  return it == edges.end() ? nullptr : &it->second;
}

std::size_t pair_index(std::size_t i, std::size_t j) {
  const Pair p = make_pair_ordered(i, j);
  // Rows before block p.first: sum_{r < first} (K - 1 - r).
  const std::size_t before = p.first * (2 * kMaxParts - p.first - 1) / 2;
  return before + (p.second - p.first - 1);
}

Pair pair_at(std::size_t row) {
  if (row >= kPairCount) throw InvalidArgument("pair row out of range: " + std::to_string(row));
  std::size_t i = 0;
  std::size_t start = 0;
  while (row >= start + (kMaxParts - 1 - i)) {
    start += kMaxParts - 1 - i;
    ++i;
  }
  return {i, i + 1 + (row - start)};
}

}  // namespace artigen::artgraph
