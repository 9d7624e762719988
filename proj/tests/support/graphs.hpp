#pragma once

#include <numbers>

#include "artigen/artgraph/graph.hpp"
#include "artigen/numcore/rng.hpp"

namespace artigen::testing {

inline artgraph::NodeAttr box_node(artgraph::Vec3 translation, artgraph::Vec3 extents, artgraph::Vec3 rotvec = {}) {
  artgraph::NodeAttr n;
  n.exists = true;
  n.pose = {rotvec[0], rotvec[1], rotvec[2], translation[0], translation[1], translation[2]};
  n.extents = extents;
  return n;
}

inline artgraph::EdgeAttr joint(artgraph::Vec3 point, artgraph::Vec3 dir, artgraph::Range prismatic,
                                artgraph::Range revolute, int chirality = 1) {
  artgraph::EdgeAttr e;
  e.chirality = chirality;
  e.plucker = artgraph::Plucker::through(point, dir).to_array();
  e.range = {prismatic, revolute};
  return e;
}

// Base box with a lid hinged about the z axis through the origin.
inline artgraph::ArticulationGraph hinge_pair(artgraph::Range revolute = {0.0, std::numbers::pi}) {
  artgraph::ArticulationGraph g;
  g.label = "hinge";
  g.nodes[0] = box_node({-0.5, 0.0, 0.0}, {1.0, 1.0, 1.0});
  g.nodes[1] = box_node({0.5, 0.0, 0.0}, {1.0, 1.0, 1.0});
  g.set_edge(0, 1, joint({0, 0, 0}, {0, 0, 1}, {0.0, 0.0}, revolute));
  return g;
}

// Random valid tree over `parts` consecutive slots with arbitrary poses, axes,
// latents and mixed joint kinds.
inline artgraph::ArticulationGraph random_tree(std::size_t parts, numcore::Rng& rng) {
  artgraph::ArticulationGraph g;
  for (std::size_t i = 0; i < parts; ++i) {
    artgraph::Vec3 w{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    g.nodes[i] = box_node({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                          {rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)}, w);
    for (auto& f : g.nodes[i].latent) f = rng.normal();
  }
  for (std::size_t i = 1; i < parts; ++i) {
    const std::size_t parent = rng.below(i);
    const artgraph::Vec3 q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const artgraph::Vec3 d{rng.normal(), rng.normal(), rng.normal()};
    const std::size_t kind = rng.below(4);
    const artgraph::Range p = (kind & 1) ? artgraph::Range{-0.2, 0.3} : artgraph::Range{0.0, 0.0};
    const artgraph::Range r = (kind & 2) ? artgraph::Range{-1.0, 1.5} : artgraph::Range{0.0, 0.0};
    g.set_edge(parent, i, joint(q, d, p, r, rng.sign()));
  }
  return g;
}

}  // namespace artigen::testing
