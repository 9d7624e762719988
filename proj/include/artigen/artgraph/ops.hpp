#pragma once

#include <map>
#include <string>
#include <vector>

#include "artigen/artgraph/graph.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::artgraph {

using numcore::Tensor;

struct EncodedGraph {
  Tensor vertices;  // K x D_v
  Tensor edges;     // K(K-1)/2 x D_e
};

EncodedGraph encode_graph(const ArticulationGraph& g);

struct DecodeThresholds {
  double existence = 0.5;
  double edge = 0.5;
};

// Smallest box extent a decoded existing part may have.
inline constexpr double kMinExtent = 1e-4;

// Quantizes matrices back to a graph: o >= 0.5 marks a part, |c| >= 0.5 marks a
// joint with chirality sign(c). Axes are projected to valid Plucker
// coordinates, range rows are sorted, rotations are canonicalized, extents are
// made positive, and joints touching absent parts are dropped. The result need
// not be a tree; see extract_tree.
ArticulationGraph decode_matrices(const Tensor& vertices, const Tensor& edges, const DecodeThresholds& th = {});

// Decodes parts as decode_matrices does, then keeps the minimum spanning tree
// of the complete graph over existing parts with weight 1 - |c|.
ArticulationGraph extract_tree(const Tensor& vertices, const Tensor& edges, const DecodeThresholds& th = {});

struct WeightedPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

// Kruskal over candidates ordered by (weight, i, j); that order is the
// tie-break. Returns tree edges sorted lexicographically. Throws
// ValidationError if the candidates do not connect every node in `nodes`.
std::vector<Pair> mst_extract(const std::vector<std::size_t>& nodes, std::vector<WeightedPair> candidates);

struct TreeStep {
  std::size_t parent = 0;
  std::size_t child = 0;
  Pair joint;
};

// Breadth-first parent/child order from the root (lowest-index existing part),
// neighbours in ascending index. Throws ValidationError unless the joints form
// a spanning tree over existing parts.
std::vector<TreeStep> tree_order(const ArticulationGraph& g);

// Joint value per edge: prismatic displacement and revolute angle. Edges missing
// from the map sit at zero, which is always admissible.
struct JointState {
  double displacement = 0.0;
  double angle = 0.0;
  bool operator==(const JointState&) const = default;
};
using PoseState = std::map<Pair, JointState>;

// Global transform of every existing part under `pose`. The lowest-index part
// is the root and keeps its rest pose; every other part moves with its parent
// and then by the screw of the connecting joint (angle * chirality about the
// axis, displacement along it). Throws ValidationError on a non-tree graph and
// InvalidArgument on an out-of-range joint value.
std::map<std::size_t, Rigid> forward_kinematics(const ArticulationGraph& g, const PoseState& pose);

// The graph re-expressed with `pose` as its rest configuration: part poses and
// joint axes are moved; ranges are kept.
ArticulationGraph apply_pose(const ArticulationGraph& g, const PoseState& pose);

// Every violated structural invariant, one message each; empty means valid.
std::vector<std::string> validate(const ArticulationGraph& g);
void require_valid(const ArticulationGraph& g, const char* context);

enum class JointKind { kFixed, kPrismatic, kRevolute, kScrew };
JointKind joint_kind(const EdgeAttr& e);

}  // namespace artigen::artgraph
