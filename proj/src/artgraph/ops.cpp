#include "artigen/artgraph/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>

#include "artigen/error.hpp"

namespace artigen::artgraph {

using numcore::Shape;

EncodedGraph encode_graph(const ArticulationGraph& g) {
  EncodedGraph out{Tensor(Shape{kMaxParts, kVertexDim}), Tensor(Shape{kPairCount, kEdgeDim})};
  for (std::size_t i = 0; i < kMaxParts; ++i) {
    const NodeAttr& n = g.nodes[i];
    if (!n.exists) continue;
    out.vertices(i, kColExists) = 1.0;
    for (std::size_t k = 0; k < 6; ++k) out.vertices(i, kColPose + k) = n.pose[k];
    for (std::size_t k = 0; k < 3; ++k) out.vertices(i, kColExtents + k) = n.extents[k];
    for (std::size_t k = 0; k < kLatentDim; ++k) out.vertices(i, kColLatent + k) = n.latent[k];
  }
  for (const auto& [pair, e] : g.edges) {
    const std::size_t row = pair_index(pair.first, pair.second);
    out.edges(row, kColChirality) = static_cast<double>(e.chirality);
    for (std::size_t k = 0; k < 6; ++k) out.edges(row, kColPlucker + k) = e.plucker[k];
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) out.edges(row, kColRange + 2 * r + c) = e.range[r][c];
    }
  }
  return out;
}

namespace {

void require_shapes(const Tensor& vertices, const Tensor& edges) {
  if (vertices.shape() != Shape{kMaxParts, kVertexDim}) {
    throw ShapeError("vertex matrix must be " + numcore::shape_string({kMaxParts, kVertexDim}) + ", got " +
                     numcore::shape_string(vertices.shape()));
  }
  if (edges.shape() != Shape{kPairCount, kEdgeDim}) {
    throw ShapeError("edge matrix must be " + numcore::shape_string({kPairCount, kEdgeDim}) + ", got " +
                     numcore::shape_string(edges.shape()));
  }
}

ArticulationGraph decode_nodes(const Tensor& vertices, const DecodeThresholds& th) {
  ArticulationGraph g;
  for (std::size_t i = 0; i < kMaxParts; ++i) {
    if (!(vertices(i, kColExists) >= th.existence)) continue;
    NodeAttr& n = g.nodes[i];
    n.exists = true;
    for (std::size_t k = 0; k < 6; ++k) n.pose[k] = vertices(i, kColPose + k);
    const Vec3 w = canonical_axis_angle({n.pose[0], n.pose[1], n.pose[2]});
    std::copy(w.begin(), w.end(), n.pose.begin());
    for (std::size_t k = 0; k < 3; ++k) n.extents[k] = std::max(std::abs(vertices(i, kColExtents + k)), kMinExtent);
    for (std::size_t k = 0; k < kLatentDim; ++k) n.latent[k] = vertices(i, kColLatent + k);
  }
  return g;
}

EdgeAttr decode_edge_row(const Tensor& edges, std::size_t row) {
  EdgeAttr e;
  e.chirality = edges(row, kColChirality) < 0.0 ? -1 : 1;
  std::array<double, 6> p{};
  for (std::size_t k = 0; k < 6; ++k) p[k] = edges(row, kColPlucker + k);
  e.plucker = plucker_project(p);
  for (std::size_t r = 0; r < 2; ++r) {
    const double a = edges(row, kColRange + 2 * r), b = edges(row, kColRange + 2 * r + 1);
    e.range[r] = {std::min(a, b), std::max(a, b)};
  }
  return e;
}

}  // namespace

ArticulationGraph decode_matrices(const Tensor& vertices, const Tensor& edges, const DecodeThresholds& th) {
  require_shapes(vertices, edges);
  ArticulationGraph g = decode_nodes(vertices, th);
  for (std::size_t row = 0; row < kPairCount; ++row) {
    const auto [i, j] = pair_at(row);
    if (!g.nodes[i].exists || !g.nodes[j].exists) continue;
    if (!(std::abs(edges(row, kColChirality)) >= th.edge)) continue;
    g.edges[{i, j}] = decode_edge_row(edges, row);
  }
  return g;
}

ArticulationGraph extract_tree(const Tensor& vertices, const Tensor& edges, const DecodeThresholds& th) {
  require_shapes(vertices, edges);
  ArticulationGraph g = decode_nodes(vertices, th);
  const auto nodes = g.existing();
  std::vector<WeightedPair> candidates;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double c = edges(pair_index(nodes[a], nodes[b]), kColChirality);
      candidates.push_back({nodes[a], nodes[b], std::clamp(1.0 - std::abs(c), 0.0, 1.0)});
    }
  }
  for (const auto& [i, j] : mst_extract(nodes, std::move(candidates))) {
    g.edges[{i, j}] = decode_edge_row(edges, pair_index(i, j));
  }
  return g;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<Pair> mst_extract(const std::vector<std::size_t>& nodes, std::vector<WeightedPair> candidates) {
  std::vector<bool> member(kMaxParts, false);
  for (auto n : nodes) {
    if (n >= kMaxParts) throw InvalidArgument("mst_extract: node index out of range");
    member[n] = true;
  }
  for (auto& c : candidates) {
    if (c.i > c.j) std::swap(c.i, c.j);
    if (!member[c.i] || !member[c.j]) throw InvalidArgument("mst_extract: candidate touches a non-member node");
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const WeightedPair& a, const WeightedPair& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  DisjointSets sets(kMaxParts);
  std::vector<Pair> tree;
  for (const auto& c : candidates) {
    if (sets.unite(c.i, c.j)) tree.emplace_back(c.i, c.j);
  }
  if (nodes.size() > 0 && tree.size() + 1 != nodes.size()) {
    throw ValidationError("mst_extract: candidate graph is disconnected (" + std::to_string(nodes.size()) +
                          " nodes, " + std::to_string(tree.size()) + " tree edges)");
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

JointKind joint_kind(const EdgeAttr& e) {
  const bool p = e.is_prismatic(), r = e.is_revolute();
  if (p && r) return JointKind::kScrew;
  if (p) return JointKind::kPrismatic;
  if (r) return JointKind::kRevolute;
  return JointKind::kFixed;
}

std::vector<TreeStep> tree_order(const ArticulationGraph& g) {
  const auto nodes = g.existing();
  std::vector<TreeStep> steps;
  if (nodes.empty()) return steps;
  std::map<std::size_t, std::vector<std::pair<std::size_t, Pair>>> adj;
  for (const auto& [pair, e] : g.edges) {
    (void)e;
    if (!g.nodes[pair.first].exists || !g.nodes[pair.second].exists) {
      throw ValidationError("joint (" + std::to_string(pair.first) + ", " + std::to_string(pair.second) +
                            ") touches a missing part");
    }
    adj[pair.first].push_back({pair.second, pair});
    adj[pair.second].push_back({pair.first, pair});
  }
  if (g.edges.size() + 1 != nodes.size()) {
    throw ValidationError("cycle detected or graph disconnected: " + std::to_string(nodes.size()) + " parts, " +
                          std::to_string(g.edges.size()) + " joints");
  }
  std::vector<bool> seen(kMaxParts, false);
  seen[nodes.front()] = true;
  std::queue<std::size_t> frontier;
  frontier.push(nodes.front());
  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop();
    for (const auto& [c, pair] : adj[p]) {
      if (seen[c]) continue;
      seen[c] = true;
      steps.push_back({p, c, pair});
      frontier.push(c);
    }
  }
  if (steps.size() + 1 != nodes.size()) throw ValidationError("cycle detected: joints do not span all parts");
  return steps;
}

namespace {

void check_in_range(double value, const Range& r, const Pair& pair, const char* what) {
  constexpr double tol = 1e-12;
  if (value == 0.0) return;
  if (value < r[0] - tol || value > r[1] + tol) {
    std::ostringstream msg;
    msg << "joint (" << pair.first << ", " << pair.second << ") " << what << " " << value << " outside [" << r[0]
        << ", " << r[1] << "]";
    throw InvalidArgument(msg.str());
  }
}

std::map<std::size_t, Rigid> joint_motions(const ArticulationGraph& g, const PoseState& pose,
                                           const std::vector<TreeStep>& steps) {
  std::map<std::size_t, Rigid> motion;
  const auto nodes = g.existing();
  if (nodes.empty()) return motion;
  motion[nodes.front()] = Rigid{};
  for (const auto& step : steps) {
    const EdgeAttr& edge = g.edges.at(step.joint);
    JointState js;
    if (auto it = pose.find(step.joint); it != pose.end()) js = it->second;
    check_in_range(js.displacement, edge.range[kPrismatic], step.joint, "displacement");
    check_in_range(js.angle, edge.range[kRevolute], step.joint, "angle");
    motion[step.child] = motion.at(step.parent) *
                         screw_motion(edge.axis(), js.angle * static_cast<double>(edge.chirality), js.displacement);
  }
  return motion;
}

}  // namespace

std::map<std::size_t, Rigid> forward_kinematics(const ArticulationGraph& g, const PoseState& pose) {
  const auto steps = tree_order(g);
  const auto motion = joint_motions(g, pose, steps);
  std::map<std::size_t, Rigid> out;
  for (const auto& [id, m] : motion) out[id] = m * g.nodes[id].transform();
  return out;
}

ArticulationGraph apply_pose(const ArticulationGraph& g, const PoseState& pose) {
  const auto steps = tree_order(g);
  const auto motion = joint_motions(g, pose, steps);
  ArticulationGraph out = g;
  for (const auto& [id, m] : motion) out.nodes[id].pose = (m * g.nodes[id].transform()).to_pose6();
  for (const auto& step : steps) {
    out.edges[step.joint].plucker = g.edges.at(step.joint).axis().transformed(motion.at(step.parent)).to_array();
  }
  return out;
}

std::vector<std::string> validate(const ArticulationGraph& g) {
  std::vector<std::string> issues;
  auto all_finite = [](const auto& arr) {
    return std::all_of(arr.begin(), arr.end(), [](double v) { return std::isfinite(v); });
  };
  for (std::size_t i = 0; i < kMaxParts; ++i) {
    const NodeAttr& n = g.nodes[i];
    if (!n.exists) continue;
    const std::string tag = "part " + std::to_string(i) + ": ";
    if (!all_finite(n.pose) || !all_finite(n.extents) || !all_finite(n.latent)) {
      issues.push_back(tag + "non-finite attribute");
      continue;
    }
    if (std::any_of(n.extents.begin(), n.extents.end(), [](double b) { return !(b > 0.0); })) {
      issues.push_back(tag + "box extents must be positive");
    }
    if (norm({n.pose[0], n.pose[1], n.pose[2]}) > std::numbers::pi + 1e-12) {
      issues.push_back(tag + "rotation angle exceeds pi");
    }
  }
  std::size_t live_edges = 0;
  DisjointSets sets(kMaxParts);
  bool cyclic = false;
  for (const auto& [pair, e] : g.edges) {
    const std::string tag = "joint (" + std::to_string(pair.first) + ", " + std::to_string(pair.second) + "): ";
    if (pair.first >= pair.second || pair.second >= kMaxParts) {
      issues.push_back(tag + "pair must satisfy i < j < K");
      continue;
    }
    if (!g.nodes[pair.first].exists || !g.nodes[pair.second].exists) {
      issues.push_back(tag + "endpoint part does not exist");
      continue;
    }
    ++live_edges;
    if (!sets.unite(pair.first, pair.second)) cyclic = true;
    if (e.chirality != 1 && e.chirality != -1) issues.push_back(tag + "chirality must be +1 or -1");
    if (!all_finite(e.plucker) || !all_finite(e.range[0]) || !all_finite(e.range[1])) {
      issues.push_back(tag + "non-finite attribute");
      continue;
    }
    const Plucker axis = e.axis();
    if (std::abs(norm(axis.direction) - 1.0) > 1e-9) issues.push_back(tag + "axis direction is not unit length");
    if (std::abs(dot(axis.direction, axis.moment)) > 1e-9) issues.push_back(tag + "axis moment not orthogonal");
    for (std::size_t r = 0; r < 2; ++r) {
      if (e.range[r][0] > e.range[r][1]) {
        issues.push_back(tag + "range order (" + std::string(r == kPrismatic ? "prismatic" : "revolute") + ")");
      }
    }
  }
  const std::size_t n = g.part_count();
  if (n > 0 && (cyclic || live_edges + 1 != n)) {
    issues.push_back("joints do not form a spanning tree over " + std::to_string(n) + " parts (" +
                     std::to_string(live_edges) + " joints)");
  }
  return issues;
}

void require_valid(const ArticulationGraph& g, const char* context) {
  const auto issues = validate(g);
  if (issues.empty()) return;
  std::string msg = std::string(context) + ": invalid graph:";
  for (const auto& s : issues) msg += "\n  " + s;
  throw ValidationError(msg);
}

}  // namespace artigen::artgraph
