#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artigen/artgraph/graph.hpp"
#include "artigen/geometry/pointcloud.hpp"
#include "artigen/numcore/rng.hpp"

namespace artigen::geometry {

enum class Template { kCabinetDoor, kDrawerBox, kFaucetArm, kLaptopLid };
enum class JointType { kRevolute, kPrismatic };

inline constexpr std::size_t kTemplateCount = 4;
const char* template_name(Template t);
std::optional<Template> template_from_name(const std::string& name);
// Smallest and largest part count the template can build.
std::pair<std::size_t, std::size_t> template_part_range(Template t);
// Joint types the template uses for the given part count, one per child slot.
std::vector<JointType> template_joint_types(Template t, std::size_t part_count);

struct SynthSpec {
  Template shape = Template::kCabinetDoor;
  std::size_t part_count = 2;
  // Per child slot; empty means the template's own types.
  std::vector<JointType> joint_types;
  // Every template dimension is scaled by a factor drawn from this range.
  double size_min = 0.8;
  double size_max = 1.2;
  std::size_t cloud_points = 2048;
};

struct Sample {
  artgraph::ArticulationGraph graph;
  PointCloud cloud;
  std::string label;
};

// Colors are a function of the part slot only.
Vec3 part_color(std::size_t slot);

// `count` samples of one spec. Objects are normalized into the unit cube
// centered at the origin, joints get random chirality, and every graph passes
// artgraph::validate. Throws InvalidArgument for an unbuildable spec.
std::vector<Sample> synth_dataset(const SynthSpec& spec, std::size_t count, numcore::Rng& rng);

// `count` samples with a template drawn uniformly per sample and part count
// uniform over the template's range clipped to [min_parts, max_parts].
std::vector<Sample> synth_mixed(std::size_t count, std::size_t min_parts, std::size_t max_parts,
                                std::size_t cloud_points, numcore::Rng& rng);

// Uniform samples on the surface of the part's box, faces chosen with
// probability proportional to area, mapped through T_g.
std::vector<Vec3> sample_part_points(const artgraph::NodeAttr& node, std::size_t n, numcore::Rng& rng);

// Surface samples over all existing parts of a graph posed at `transforms`
// (one per existing part), split across parts by area with largest-remainder
// rounding. Pass forward_kinematics output or the rest transforms.
std::vector<Vec3> sample_graph_points(const artgraph::ArticulationGraph& g,
                                      const std::map<std::size_t, artgraph::Rigid>& transforms, std::size_t n,
                                      numcore::Rng& rng);

// Colored cloud of a graph at rest.
PointCloud render_cloud(const artgraph::ArticulationGraph& g, std::size_t n, numcore::Rng& rng);

}  // namespace artigen::geometry
