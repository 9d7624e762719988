#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "artigen/artgraph/se3.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::artgraph {

inline constexpr std::size_t kMaxParts = 8;     // K
inline constexpr std::size_t kLatentDim = 128;  // F
inline constexpr std::size_t kVertexDim = 1 + 6 + 3 + kLatentDim;
inline constexpr std::size_t kEdgeDim = 1 + 6 + 4;
inline constexpr std::size_t kPairCount = kMaxParts * (kMaxParts - 1) / 2;

// Column offsets inside a vertex row [o, Tg(6), b(3), f(F)].
inline constexpr std::size_t kColExists = 0;
inline constexpr std::size_t kColPose = 1;
inline constexpr std::size_t kColExtents = 7;
inline constexpr std::size_t kColLatent = 10;
// Column offsets inside an edge row [c, plucker(6), r(2x2)].
inline constexpr std::size_t kColChirality = 0;
inline constexpr std::size_t kColPlucker = 1;
inline constexpr std::size_t kColRange = 7;

inline constexpr std::size_t kPrismatic = 0;
inline constexpr std::size_t kRevolute = 1;
// A range row narrower than this is a locked degree of freedom.
inline constexpr double kDegenerateRange = 1e-6;

using Pair = std::pair<std::size_t, std::size_t>;
using Range = std::array<double, 2>;

struct NodeAttr {
  bool exists = false;
  std::array<double, 6> pose{};  // axis-angle (3) + translation (3), local -> global
  Vec3 extents{};               // full box side lengths
  std::array<double, kLatentDim> latent{};

  Rigid transform() const { return Rigid::from_pose6(pose); }
  bool operator==(const NodeAttr&) const = default;
};

struct EdgeAttr {
  int chirality = 1;  // +1 or -1 for an existing joint
  std::array<double, 6> plucker{0, 0, 1, 0, 0, 0};
  std::array<Range, 2> range{};  // [kPrismatic] length units, [kRevolute] radians

  Plucker axis() const { return Plucker::from_array(plucker); }
  bool is_prismatic() const { return range[kPrismatic][1] - range[kPrismatic][0] >= kDegenerateRange; }
  bool is_revolute() const { return range[kRevolute][1] - range[kRevolute][0] >= kDegenerateRange; }
  bool operator==(const EdgeAttr&) const = default;
};

// K part slots plus joints keyed by ordered pair (i < j).
struct ArticulationGraph {
  std::array<NodeAttr, kMaxParts> nodes{};
  std::map<Pair, EdgeAttr> edges;
  std::string label;

  std::vector<std::size_t> existing() const;
  std::size_t part_count() const { return existing().size(); }
  void set_edge(std::size_t a, std::size_t b, const EdgeAttr& e);
  const EdgeAttr* edge(std::size_t a, std::size_t b) const;

  bool operator==(const ArticulationGraph&) const = default;
};

Pair make_pair_ordered(std::size_t a, std::size_t b);
// Row of pair (i, j) in the lexicographic order (0,1), (0,2), ..., (K-2, K-1).
std::size_t pair_index(std::size_t i, std::size_t j);
Pair pair_at(std::size_t row);

}  // namespace artigen::artgraph
