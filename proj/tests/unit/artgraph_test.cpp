#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "../support/graphs.hpp"
#include "../support/spanning_trees.hpp"
#include "artigen/artgraph/graph.hpp"
#include "artigen/artgraph/io.hpp"
#include "artigen/artgraph/ops.hpp"
#include "artigen/artgraph/se3.hpp"
#include "artigen/error.hpp"

using namespace artigen;
using namespace artigen::artgraph;
using artigen::numcore::Rng;
using artigen::testing::box_node;
using artigen::testing::hinge_pair;
using artigen::testing::joint;
using artigen::testing::random_tree;

namespace {

double max_diff(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

double max_diff(const Rigid& a, const Rigid& b) {
  double worst = max_diff(a.translation, b.translation);
  for (int r = 0; r < 3; ++r) worst = std::max(worst, max_diff(a.rotation[r], b.rotation[r]));
  return worst;
}

ArticulationGraph without_label(ArticulationGraph g) {
  g.label.clear();
  return g;
}

}  // namespace

TEST(PairOrder, LexicographicRows) {
  EXPECT_EQ(pair_index(0, 1), 0u);
  EXPECT_EQ(pair_index(0, 7), 6u);
  EXPECT_EQ(pair_index(1, 2), 7u);
  EXPECT_EQ(pair_index(6, 7), 27u);
  EXPECT_EQ(pair_index(3, 1), pair_index(1, 3));
  for (std::size_t row = 0; row < kPairCount; ++row) {
    const auto [i, j] = pair_at(row);
    EXPECT_LT(i, j);
    EXPECT_EQ(pair_index(i, j), row);
  }
  EXPECT_THROW(pair_index(2, 2), InvalidArgument);
}

TEST(Se3, AxisAngleRoundTrip) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 w{rng.normal(), rng.normal(), rng.normal()};
    w = canonical_axis_angle(w);
    const Vec3 back = to_axis_angle(from_axis_angle(w));
    EXPECT_LT(max_diff(from_axis_angle(back)[0], from_axis_angle(w)[0]), 1e-12);
    EXPECT_LE(norm(back), std::numbers::pi + 1e-12);
  }
  const Vec3 near_pi{0.0, std::numbers::pi - 1e-9, 0.0};
  EXPECT_LT(max_diff(to_axis_angle(from_axis_angle(near_pi)), near_pi), 1e-7);
}

TEST(Se3, RpyReproducesRotation) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 r = from_axis_angle({rng.normal(), rng.normal(), rng.normal()});
    const Vec3 rpy = to_rpy(r);
    const Mat3 rebuilt = rotation_about({0, 0, 1}, rpy[2]) * rotation_about({0, 1, 0}, rpy[1]) *
                         rotation_about({1, 0, 0}, rpy[0]);
    for (int k = 0; k < 3; ++k) EXPECT_LT(max_diff(rebuilt[k], r[k]), 1e-12);
  }
}

TEST(Plucker, ProjectRescales) {
  const auto p = plucker_project({2, 0, 0, 0, 0, 4});
  const std::array<double, 6> want{1, 0, 0, 0, 0, 2};
  for (int k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(p[k], want[k]);
}

TEST(Plucker, ProjectIsIdempotent) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 6> raw{};
    for (auto& v : raw) v = rng.normal();
    const auto once = plucker_project(raw);
    const auto twice = plucker_project(once);
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(once[k], twice[k], 1e-12);
    const Plucker line = Plucker::from_array(once);
    EXPECT_NEAR(norm(line.direction), 1.0, 1e-9);
    EXPECT_NEAR(dot(line.direction, line.moment), 0.0, 1e-9);
  }
  const auto valid = Plucker::through({0.3, -0.2, 0.9}, {1, 2, 3}).to_array();
  EXPECT_EQ(plucker_project(valid), valid);
}

TEST(Plucker, RecoversLineThroughPoint) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Vec3 u{rng.normal(), rng.normal(), rng.normal()};
    const double scale = rng.uniform(0.1, 5.0);
    const Vec3 d = scale * u;
    const Vec3 m = cross(q, d);
    const Plucker line = Plucker::from_array(plucker_project({d[0], d[1], d[2], m[0], m[1], m[2]}));
    EXPECT_LE(line.distance_to(q), 1e-6);
  }
}

TEST(Plucker, DegenerateDirectionThrows) {
  EXPECT_THROW(plucker_project({0, 0, 0, 1, 0, 0}), NumericalError);
  EXPECT_THROW(plucker_project({1e-9, 0, 0, 1, 0, 0}), NumericalError);
}

TEST(Encode, EmptyGraphIsZero) {
  const auto enc = encode_graph(ArticulationGraph{});
  EXPECT_EQ(enc.vertices, Tensor(numcore::Shape{kMaxParts, kVertexDim}));
  EXPECT_EQ(enc.edges, Tensor(numcore::Shape{kPairCount, kEdgeDim}));
}

TEST(Encode, HingeRows) {
  const auto g = hinge_pair();
  const auto enc = encode_graph(g);
  EXPECT_EQ(enc.vertices(0, kColExists), 1.0);
  EXPECT_EQ(enc.vertices(1, kColExists), 1.0);
  for (std::size_t i = 2; i < kMaxParts; ++i) {
    for (std::size_t c = 0; c < kVertexDim; ++c) EXPECT_EQ(enc.vertices(i, c), 0.0);
  }
  EXPECT_EQ(std::abs(enc.edges(0, kColChirality)), 1.0);
  EXPECT_DOUBLE_EQ(enc.edges(0, kColRange + 3), std::numbers::pi);
}

TEST(Encode, RoundTripIsExact) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_tree(1 + rng.below(kMaxParts), rng);
    const auto enc = encode_graph(g);
    EXPECT_EQ(decode_matrices(enc.vertices, enc.edges), without_label(g));
    EXPECT_EQ(extract_tree(enc.vertices, enc.edges), without_label(g));
  }
}

TEST(Decode, Thresholds) {
  auto enc = encode_graph(hinge_pair());
  enc.vertices(1, kColExists) = 0.49;
  EXPECT_FALSE(decode_matrices(enc.vertices, enc.edges).nodes[1].exists);
  EXPECT_TRUE(decode_matrices(enc.vertices, enc.edges).edges.empty());

  enc = encode_graph(hinge_pair());
  enc.edges(0, kColChirality) = -0.7;
  const auto g = decode_matrices(enc.vertices, enc.edges);
  ASSERT_NE(g.edge(0, 1), nullptr);
  EXPECT_EQ(g.edge(0, 1)->chirality, -1);
  enc.edges(0, kColChirality) = 0.3;
  EXPECT_TRUE(decode_matrices(enc.vertices, enc.edges).edges.empty());
}

TEST(Decode, CanonicalizesAttributes) {
  auto enc = encode_graph(hinge_pair());
  enc.vertices(0, kColExtents) = -0.3;
  enc.vertices(0, kColExtents + 1) = 0.0;
  enc.vertices(1, kColPose + 2) = 1.5 * std::numbers::pi;
  enc.edges(0, kColRange + 2) = 2.0;
  enc.edges(0, kColRange + 3) = -1.0;
  enc.edges(0, kColPlucker + 2) = 3.0;
  const auto g = decode_matrices(enc.vertices, enc.edges);
  EXPECT_EQ(g.nodes[0].extents[0], 0.3);
  EXPECT_EQ(g.nodes[0].extents[1], kMinExtent);
  EXPECT_NEAR(g.nodes[1].pose[2], -0.5 * std::numbers::pi, 1e-12);
  EXPECT_EQ(g.edge(0, 1)->range[kRevolute], (Range{-1.0, 2.0}));
  EXPECT_NEAR(norm(g.edge(0, 1)->axis().direction), 1.0, 1e-12);
  EXPECT_TRUE(validate(g).empty());
}

TEST(Decode, ShapeMismatchThrows) {
  EXPECT_THROW(decode_matrices(Tensor(numcore::Shape{7, kVertexDim}), Tensor(numcore::Shape{kPairCount, kEdgeDim})),
               ShapeError);
}

TEST(Decode, TopologyStableUnderSmallNoise) {
  Rng rng(12);
  int identical = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_tree(2 + rng.below(kMaxParts - 1), rng);
    auto enc = encode_graph(g);
    for (auto& v : enc.vertices.data()) v += 0.05 * rng.normal();
    for (auto& v : enc.edges.data()) v += 0.05 * rng.normal();
    const auto d = extract_tree(enc.vertices, enc.edges);
    bool same = d.existing() == g.existing() && d.edges.size() == g.edges.size();
    for (const auto& [pair, e] : g.edges) {
      const EdgeAttr* got = d.edge(pair.first, pair.second);
      same = same && got != nullptr && got->chirality == e.chirality;
    }
    identical += same ? 1 : 0;
  }
  EXPECT_GE(identical, 99);
}

TEST(Mst, TwoNodes) {
  EXPECT_EQ(mst_extract({2, 5}, {{2, 5, 0.7}}), (std::vector<Pair>{{2, 5}}));
}

TEST(Mst, MatchesExhaustiveEnumeration) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto edges = artigen::testing::random_complete_graph(4, rng, trial % 2 == 1);
    const auto oracle = artigen::testing::exhaustive_min_tree(4, edges);
    ASSERT_EQ(oracle.spanning_trees, 16u);
    EXPECT_EQ(mst_extract({0, 1, 2, 3}, edges), oracle.best) << "trial " << trial;
  }
}

TEST(Mst, EqualWeightsPickEarliestTree) {
  std::vector<WeightedPair> edges;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) edges.push_back({i, j, 0.5});
  }
  std::reverse(edges.begin(), edges.end());
  const std::vector<Pair> want{{0, 1}, {0, 2}, {0, 3}};
  EXPECT_EQ(mst_extract({0, 1, 2, 3}, edges), want);
  EXPECT_EQ(mst_extract({0, 1, 2, 3}, edges), want);
}

TEST(Mst, DisconnectedThrows) {
  EXPECT_THROW(mst_extract({0, 1, 2}, {{0, 1, 0.1}}), ValidationError);
}

TEST(Mst, TreePropertiesOnRandomGraphs) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(kMaxParts);
    std::vector<std::size_t> nodes(n);
    for (std::size_t k = 0; k < n; ++k) nodes[k] = k;
    const auto tree = mst_extract(nodes, artigen::testing::random_complete_graph(n, rng, trial % 2 == 0));
    ASSERT_EQ(tree.size(), n - 1);
    ArticulationGraph g;
    for (auto k : nodes) g.nodes[k] = box_node({0, 0, 0}, {1, 1, 1});
    for (const auto& [i, j] : tree) g.set_edge(i, j, EdgeAttr{});
    EXPECT_TRUE(validate(g).empty());
  }
}

TEST(ExtractTree, KeepsMostConfidentEdges) {
  auto enc = encode_graph(hinge_pair());
  enc.vertices(2, kColExists) = 1.0;
  enc.vertices(2, kColExtents) = enc.vertices(2, kColExtents + 1) = enc.vertices(2, kColExtents + 2) = 0.2;
  for (std::size_t row : {pair_index(0, 2), pair_index(1, 2)}) {
    enc.edges(row, kColPlucker) = 1.0;
  }
  enc.edges(pair_index(0, 2), kColChirality) = 0.2;
  enc.edges(pair_index(1, 2), kColChirality) = -0.9;
  const auto g = extract_tree(enc.vertices, enc.edges);
  EXPECT_EQ(g.edges.size(), 2u);
  ASSERT_NE(g.edge(1, 2), nullptr);
  EXPECT_EQ(g.edge(1, 2)->chirality, -1);
  EXPECT_EQ(g.edge(0, 2), nullptr);
}

TEST(Kinematics, ZeroPoseIsRest) {
  Rng rng(15);
  const auto g = random_tree(6, rng);
  for (const auto& [id, t] : forward_kinematics(g, {})) EXPECT_EQ(max_diff(t, g.nodes[id].transform()), 0.0);
}

TEST(Kinematics, QuarterTurnHinge) {
  ArticulationGraph g;
  g.nodes[0] = box_node({0, 0, 0}, {1, 1, 1});
  g.nodes[1] = box_node({0, 0, 0}, {2, 2, 2});
  g.set_edge(0, 1, joint({0, 0, 0}, {0, 0, 1}, {0, 0}, {0, std::numbers::pi}));
  const auto fk = forward_kinematics(g, {{{0, 1}, {0.0, std::numbers::pi / 2}}});
  const Vec3 corner = fk.at(1).apply({1, 0, 0});
  EXPECT_LT(max_diff(corner, {0, 1, 0}), 1e-15);
  EXPECT_EQ(max_diff(fk.at(0), Rigid{}), 0.0);
}

TEST(Kinematics, ChiralityFlipsRotation) {
  auto g = hinge_pair();
  g.edges.at({0, 1}).chirality = -1;
  const auto fk = forward_kinematics(g, {{{0, 1}, {0.0, std::numbers::pi / 2}}});
  EXPECT_LT(max_diff(fk.at(1).apply({0, 0, 0}), {0, -0.5, 0}), 1e-15);
}

TEST(Kinematics, PrismaticTranslatesExactly) {
  ArticulationGraph g;
  g.nodes[0] = box_node({0.1, 0.2, 0.3}, {1, 1, 1});
  g.nodes[3] = box_node({0.25, -0.5, 0.125}, {0.5, 0.5, 0.5});
  g.set_edge(0, 3, joint({0, 0, 0}, {0, 0, 1}, {0, 0.5}, {0, 0}));
  const auto fk = forward_kinematics(g, {{{0, 3}, {0.3, 0.0}}});
  const Vec3 want{0.25, -0.5, 0.125 + 0.3};
  EXPECT_EQ(fk.at(3).translation, want);
  EXPECT_EQ(fk.at(3).rotation, identity3());
}

TEST(Kinematics, ChainComposesAlongTree) {
  ArticulationGraph g;
  g.nodes[0] = box_node({0, 0, 0}, {1, 1, 1});
  g.nodes[1] = box_node({1, 0, 0}, {1, 1, 1});
  g.nodes[2] = box_node({2, 0, 0}, {1, 1, 1});
  g.set_edge(0, 1, joint({0, 0, 0}, {0, 0, 1}, {0, 0}, {0, 2}));
  g.set_edge(1, 2, joint({0, 0, 0}, {0, 0, 1}, {0, 1}, {0, 0}));
  const auto fk = forward_kinematics(g, {{{0, 1}, {0.0, std::numbers::pi / 2}}, {{1, 2}, {0.5, 0.0}}});
  EXPECT_LT(max_diff(fk.at(2).translation, {0, 2, 0.5}), 1e-15);
}

TEST(Kinematics, Errors) {
  auto g = hinge_pair({0.0, 1.0});
  EXPECT_THROW(forward_kinematics(g, {{{0, 1}, {0.0, 1.5}}}), InvalidArgument);
  EXPECT_THROW(forward_kinematics(g, {{{0, 1}, {0.2, 0.0}}}), InvalidArgument);
  g.nodes[2] = box_node({0, 1, 0}, {1, 1, 1});
  g.set_edge(0, 2, EdgeAttr{});
  g.set_edge(1, 2, EdgeAttr{});
  EXPECT_THROW(forward_kinematics(g, {}), ValidationError);
}

TEST(Kinematics, PosedGraphAtZeroMatchesPose) {
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_tree(2 + rng.below(kMaxParts - 1), rng);
    PoseState pose;
    for (const auto& [pair, e] : g.edges) {
      pose[pair] = {rng.uniform(e.range[kPrismatic][0], e.range[kPrismatic][1]),
                    rng.uniform(e.range[kRevolute][0], e.range[kRevolute][1])};
    }
    const auto fk = forward_kinematics(g, pose);
    const auto posed = apply_pose(g, pose);
    EXPECT_TRUE(validate(posed).empty());
    for (const auto& [id, t] : forward_kinematics(posed, {})) EXPECT_LT(max_diff(t, fk.at(id)), 1e-12);
  }
}

TEST(Validate, AcceptsValidGraphs) {
  Rng rng(17);
  EXPECT_TRUE(validate(ArticulationGraph{}).empty());
  for (int trial = 0; trial < 50; ++trial) EXPECT_TRUE(validate(random_tree(1 + rng.below(kMaxParts), rng)).empty());
}

TEST(Validate, EdgeToMissingPartNamesPair) {
  auto g = hinge_pair();
  g.edges[{1, 4}] = EdgeAttr{};
  const auto issues = validate(g);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("(1, 4)"), std::string::npos);
}

TEST(Validate, RangeOrder) {
  auto g = hinge_pair();
  g.edges.at({0, 1}).range[kRevolute] = {1.0, 0.0};
  const auto issues = validate(g);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("range order"), std::string::npos);
}

TEST(Validate, ReportsEachInvariant) {
  auto g = hinge_pair();
  g.nodes[0].extents[1] = 0.0;
  g.nodes[1].pose[0] = 4.0;
  g.edges.at({0, 1}).chirality = 0;
  g.edges.at({0, 1}).plucker = {0, 0, 2, 0, 0, 0};
  EXPECT_EQ(validate(g).size(), 4u);
  g = hinge_pair();
  g.nodes[3] = box_node({0, 0, 0}, {1, 1, 1});
  EXPECT_EQ(validate(g).size(), 1u);
  EXPECT_THROW(require_valid(g, "test"), ValidationError);
}

TEST(JointKind, FromRanges) {
  EdgeAttr e;
  EXPECT_EQ(joint_kind(e), JointKind::kFixed);
  e.range[kPrismatic] = {0, 1e-7};
  EXPECT_EQ(joint_kind(e), JointKind::kFixed);
  e.range[kPrismatic] = {0, 0.2};
  EXPECT_EQ(joint_kind(e), JointKind::kPrismatic);
  e.range[kRevolute] = {0, 0.2};
  EXPECT_EQ(joint_kind(e), JointKind::kScrew);
  e.range[kPrismatic] = {0.1, 0.1};
  EXPECT_EQ(joint_kind(e), JointKind::kRevolute);
}

TEST(Json, RoundTripIsBitwise) {
  Rng rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = random_tree(1 + rng.below(kMaxParts), rng);
    g.label = "label \"" + std::to_string(trial) + "\"";
    g.nodes[7].latent[3] = -0.0;
    const auto back = import_json(export_json(g));
    EXPECT_EQ(back, g);
    EXPECT_EQ(export_json(back), export_json(g));
  }
}

TEST(Json, RejectsBadDocuments) {
  EXPECT_THROW(import_json("{"), ValidationError);
  EXPECT_THROW(import_json("{\"format\": \"other\"}"), ValidationError);
  auto doc = to_json(hinge_pair());
  doc["version"] = 99;
  EXPECT_THROW(import_json(doc.dump()), ValidationError);
  doc = to_json(hinge_pair());
  doc["parts"][1]["b"] = {1.0, 2.0};
  EXPECT_THROW(import_json(doc.dump()), ValidationError);
  auto bad = hinge_pair();
  bad.edges.at({0, 1}).range[0] = {1.0, 0.0};
  EXPECT_THROW(export_json(bad), ValidationError);
}

namespace {

namespace pt = boost::property_tree;

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

std::vector<const pt::ptree*> children(const pt::ptree& robot, const std::string& tag) {
  std::vector<const pt::ptree*> out;
  for (const auto& [name, child] : robot) {
    if (name == tag) out.push_back(&child);
  }
  return out;
}

}  // namespace

TEST(Urdf, HingeHasOneRevoluteJoint) {
  const auto g = hinge_pair({0.0, 2.5});
  const auto tree = parse_xml(export_urdf(g));
  const pt::ptree& robot = tree.get_child("robot");
  EXPECT_EQ(robot.get<std::string>("<xmlattr>.name"), "hinge");
  EXPECT_EQ(children(robot, "link").size(), 2u);
  const auto joints = children(robot, "joint");
  ASSERT_EQ(joints.size(), 1u);
  EXPECT_EQ(joints[0]->get<std::string>("<xmlattr>.type"), "revolute");
  EXPECT_EQ(joints[0]->get<std::string>("parent.<xmlattr>.link"), "part_0");
  EXPECT_EQ(joints[0]->get<std::string>("child.<xmlattr>.link"), "part_1");
  EXPECT_DOUBLE_EQ(joints[0]->get<double>("limit.<xmlattr>.lower"), 0.0);
  EXPECT_DOUBLE_EQ(joints[0]->get<double>("limit.<xmlattr>.upper"), 2.5);
  EXPECT_EQ(joints[0]->get<std::string>("axis.<xmlattr>.xyz"), "0 0 1");
}

TEST(Urdf, JointKindsAndLinkCounts) {
  Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_tree(2 + rng.below(kMaxParts - 1), rng);
    const auto tree = parse_xml(export_urdf(g));
    const pt::ptree& robot = tree.get_child("robot");
    std::size_t screws = 0, fixed = 0;
    for (const auto& [pair, e] : g.edges) {
      screws += joint_kind(e) == JointKind::kScrew ? 1 : 0;
      fixed += joint_kind(e) == JointKind::kFixed ? 1 : 0;
    }
    EXPECT_EQ(children(robot, "link").size(), g.part_count() + screws);
    const auto joints = children(robot, "joint");
    EXPECT_EQ(joints.size(), g.edges.size() + screws);
    std::size_t fixed_seen = 0;
    for (const auto* j : joints) fixed_seen += j->get<std::string>("<xmlattr>.type") == "fixed" ? 1 : 0;
    EXPECT_EQ(fixed_seen, fixed);
  }
}

TEST(Urdf, JointOriginsLieOnAxes) {
  Rng rng(20);
  const auto g = random_tree(5, rng);
  const auto tree = parse_xml(export_urdf(g));
  std::map<std::string, Vec3> frame{{"part_0", {0, 0, 0}}};
  std::map<std::string, std::string> joint_of_child;
  for (const auto& [name, j] : tree.get_child("robot")) {
    if (name != "joint") continue;
    std::istringstream xyz(j.get<std::string>("origin.<xmlattr>.xyz"));
    Vec3 o{};
    xyz >> o[0] >> o[1] >> o[2];
    const auto parent = j.get<std::string>("parent.<xmlattr>.link");
    const auto child = j.get<std::string>("child.<xmlattr>.link");
    frame[child] = frame.at(parent) + o;
    joint_of_child[child] = j.get<std::string>("<xmlattr>.name");
  }
  for (const auto& [pair, e] : g.edges) {
    const std::string child = "part_" + std::to_string(pair.second);
    EXPECT_LT(e.axis().distance_to(frame.at(child)), 1e-12);
  }
}
