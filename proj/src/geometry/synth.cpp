#include "artigen/geometry/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "artigen/artgraph/ops.hpp"
#include "artigen/error.hpp"

namespace artigen::geometry {

using artgraph::ArticulationGraph;
using artgraph::NodeAttr;
using artgraph::Range;
using numcore::Rng;

const char* template_name(Template t) {
  switch (t) {
    case Template::kCabinetDoor: return "cabinet_door";
    case Template::kDrawerBox: return "drawer_box";
    case Template::kFaucetArm: return "faucet_arm";
    case Template::kLaptopLid: return "laptop_lid";
  }
  return "unknown";
}

std::optional<Template> template_from_name(const std::string& name) {
  for (std::size_t k = 0; k < kTemplateCount; ++k) {
    const auto t = static_cast<Template>(k);
    if (name == template_name(t)) return t;
  }
  return std::nullopt;
}

std::pair<std::size_t, std::size_t> template_part_range(Template t) {
  switch (t) {
    case Template::kCabinetDoor: return {2, artgraph::kMaxParts};
    case Template::kDrawerBox: return {2, artgraph::kMaxParts};
    case Template::kFaucetArm: return {2, 4};
    case Template::kLaptopLid: return {2, 2};
  }
  return {0, 0};
}

std::vector<JointType> template_joint_types(Template t, std::size_t part_count) {
  std::vector<JointType> out;
  for (std::size_t child = 1; child < part_count; ++child) {
    switch (t) {
      case Template::kCabinetDoor:
      case Template::kLaptopLid: out.push_back(JointType::kRevolute); break;
      case Template::kDrawerBox: out.push_back(JointType::kPrismatic); break;
      case Template::kFaucetArm: out.push_back(child == 3 ? JointType::kPrismatic : JointType::kRevolute); break;
    }
  }
  return out;
}

Vec3 part_color(std::size_t slot) {
  const double k = static_cast<double>(artgraph::kMaxParts - 1);
  return {static_cast<double>(slot % artgraph::kMaxParts) / k, static_cast<double>((3 * slot) % artgraph::kMaxParts) / k,
          static_cast<double>((5 * slot) % artgraph::kMaxParts) / k};
}

namespace {

struct PartBox {
  Vec3 center;
  Vec3 extents;
};

struct ChildJoint {
  std::size_t parent = 0;
  Vec3 point;
  Vec3 direction;  // direction of positive physical motion
  double revolute_hi = 0.0;
  double revolute_lo = 0.0;
  double prismatic_hi = 0.0;
};

struct Layout {
  std::vector<PartBox> parts;     // slot order; slot 0 is the base
  std::vector<ChildJoint> joints;  // joints[k] drives slot k + 1
};

Layout cabinet_door(std::size_t n, const std::function<double()>& jitter, Rng& rng) {
  const double w = 0.8 * jitter(), d = 0.5 * jitter(), h = 1.0 * jitter(), t = 0.03;
  Layout out;
  out.parts.push_back({{0, 0, 0}, {w, d, h}});
  const std::size_t doors = n - 1;
  const std::size_t rows = doors <= 4 ? 1 : 2;
  const std::size_t cols = (doors + rows - 1) / rows;
  for (std::size_t k = 0; k < doors; ++k) {
    const std::size_t r = k / cols, c = k % cols;
    const std::size_t in_row = r + 1 < rows ? cols : doors - r * cols;
    const double dw = w / static_cast<double>(in_row), dh = h / static_cast<double>(rows);
    const double x = -w / 2 + (static_cast<double>(c) + 0.5) * dw;
    const double z = -h / 2 + (static_cast<double>(r) + 0.5) * dh;
    out.parts.push_back({{x, -d / 2 - t / 2, z}, {dw, t, dh}});
    const bool left = c % 2 == 0;
    const double hinge_x = left ? x - dw / 2 : x + dw / 2;
    out.joints.push_back({0, {hinge_x, -d / 2 - t / 2, z}, {0, 0, left ? -1.0 : 1.0},
                          rng.uniform(0.5, 0.8) * std::numbers::pi, 0.0, 0.3 * d});
  }
  return out;
}

Layout drawer_box(std::size_t n, const std::function<double()>& jitter, Rng& rng) {
  const std::size_t drawers = n - 1;
  const double w = 0.7 * jitter(), d = 0.6 * jitter();
  const double h = (0.1 + 0.2 * static_cast<double>(drawers)) * jitter();
  Layout out;
  out.parts.push_back({{0, 0, 0}, {w, d, h}});
  const double slot_h = h / static_cast<double>(drawers);
  for (std::size_t k = 0; k < drawers; ++k) {
    const double z = -h / 2 + (static_cast<double>(k) + 0.5) * slot_h;
    const double y = -d / 2 - 0.02 + 0.45 * d;
    out.parts.push_back({{0, y, z}, {0.9 * w, 0.9 * d, 0.85 * slot_h}});
    out.joints.push_back({0, {0, y, z}, {0, -1, 0}, 0.5 * std::numbers::pi, 0.0, rng.uniform(0.6, 0.8) * d});
  }
  return out;
}

Layout faucet_arm(std::size_t n, const std::function<double()>& jitter, Rng& rng) {
  const double bw = 0.12 * jitter(), bh = 0.35 * jitter();
  const double arm = 0.45 * jitter(), thick = 0.06;
  Layout out;
  out.parts.push_back({{0, 0, 0}, {bw, bw, bh}});
  const double arm_z = bh / 2 + thick / 2;
  out.parts.push_back({{arm / 2 - bw / 4, 0, arm_z}, {arm, thick, thick}});
  const double swing = rng.uniform(0.3, 0.5) * std::numbers::pi;
  out.joints.push_back({0, {0, 0, 0}, {0, 0, 1}, swing, -swing, 0.1 * bh});
  if (n >= 3) {
    const double lever = 0.15 * jitter();
    const Vec3 pivot{-bw / 2, 0, bh / 2 - 0.05};
    out.parts.push_back({{pivot[0] - 0.02, 0, pivot[2]}, {0.04, lever, 0.04}});
    out.joints.push_back({0, pivot, {0, 1, 0}, rng.uniform(0.2, 0.35) * std::numbers::pi, 0.0, 0.05});
  }
  if (n >= 4) {
    const double tip = arm - bw / 4;
    const Vec3 head{tip + 0.04, 0, arm_z - 0.05};
    out.parts.push_back({head, {0.08, 0.05, 0.1}});
    out.joints.push_back({1, head, {1, 0, 0}, 0.5 * std::numbers::pi, 0.0, 0.1 * jitter()});
  }
  return out;
}

Layout laptop_lid(const std::function<double()>& jitter, Rng& rng) {
  const double w = 1.0 * jitter(), d = 0.7 * jitter(), t = 0.04 * jitter();
  Layout out;
  out.parts.push_back({{0, 0, 0}, {w, d, t}});
  out.parts.push_back({{0, 0, t / 2 + 0.01}, {w, d, 0.02}});
  out.joints.push_back({0, {0, d / 2, t / 2}, {-1, 0, 0}, rng.uniform(0.6, 1.0) * std::numbers::pi, 0.0, 0.1 * d});
  return out;
}

// Fixed part-shape encoder: a seeded projection of the part's box and placement.
std::array<double, artgraph::kLatentDim> part_latent(const NodeAttr& n, Template t) {
  constexpr std::size_t kInputs = 3 + 3 + kTemplateCount + 1;
  static const std::vector<double> weights = [] {
    Rng rng(0x1a7e27ULL);
    std::vector<double> w(artgraph::kLatentDim * kInputs);
    for (auto& v : w) v = rng.normal();
    return w;
  }();
  std::array<double, kInputs> in{};
  for (int k = 0; k < 3; ++k) {
    in[k] = n.extents[k];
    in[3 + k] = n.pose[3 + k];
  }
  in[6 + static_cast<std::size_t>(t)] = 1.0;
  in[kInputs - 1] = 1.0;
  std::array<double, artgraph::kLatentDim> f{};
  for (std::size_t r = 0; r < artgraph::kLatentDim; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < kInputs; ++k) acc += weights[r * kInputs + k] * in[k];
    f[r] = 0.5 * std::tanh(acc);
  }
  return f;
}

void require_buildable(const SynthSpec& spec) {
  const auto [lo, hi] = template_part_range(spec.shape);
  if (spec.part_count < lo || spec.part_count > hi) {
    throw InvalidArgument(std::string(template_name(spec.shape)) + " builds " + std::to_string(lo) + ".." +
                          std::to_string(hi) + " parts, asked for " + std::to_string(spec.part_count));
  }
  if (!spec.joint_types.empty() && spec.joint_types.size() + 1 != spec.part_count) {
    throw InvalidArgument("joint_types needs one entry per child part (" + std::to_string(spec.part_count - 1) + ")");
  }
  if (!(spec.size_min > 0.0) || spec.size_min > spec.size_max) throw InvalidArgument("invalid size range");
  if (spec.cloud_points < 1) throw InvalidArgument("cloud_points must be positive");
}

Sample build_sample(const SynthSpec& spec, Rng& rng) {
  auto jitter = [&] { return rng.uniform(spec.size_min, spec.size_max); };
  Layout layout;
  switch (spec.shape) {
    case Template::kCabinetDoor: layout = cabinet_door(spec.part_count, jitter, rng); break;
    case Template::kDrawerBox: layout = drawer_box(spec.part_count, jitter, rng); break;
    case Template::kFaucetArm: layout = faucet_arm(spec.part_count, jitter, rng); break;
    case Template::kLaptopLid: layout = laptop_lid(jitter, rng); break;
  }
  const auto types = spec.joint_types.empty() ? template_joint_types(spec.shape, spec.part_count) : spec.joint_types;

  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& p : layout.parts) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p.center[k] - p.extents[k] / 2);
      hi[k] = std::max(hi[k], p.center[k] + p.extents[k] / 2);
    }
  }
  const Vec3 mid = 0.5 * (lo + hi);
  const double scale = 1.0 / std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});

  Sample s;
  s.label = template_name(spec.shape);
  s.graph.label = s.label;
  for (std::size_t slot = 0; slot < layout.parts.size(); ++slot) {
    NodeAttr& n = s.graph.nodes[slot];
    n.exists = true;
    const Vec3 c = scale * (layout.parts[slot].center - mid);
    n.pose = {0, 0, 0, c[0], c[1], c[2]};
    n.extents = scale * layout.parts[slot].extents;
    n.latent = part_latent(n, spec.shape);
  }
  for (std::size_t k = 0; k < layout.joints.size(); ++k) {
    const ChildJoint& j = layout.joints[k];
    artgraph::EdgeAttr e;
    e.chirality = rng.sign();
    Vec3 dir = j.direction;
    if (types[k] == JointType::kRevolute) {
      dir = static_cast<double>(e.chirality) * dir;
      e.range[artgraph::kRevolute] = {j.revolute_lo, j.revolute_hi};
    } else {
      e.range[artgraph::kPrismatic] = {0.0, scale * j.prismatic_hi};
    }
    e.plucker = artgraph::Plucker::through(scale * (j.point - mid), dir).to_array();
    s.graph.set_edge(j.parent, k + 1, e);
  }
  artgraph::require_valid(s.graph, "synth_dataset");
  s.cloud = render_cloud(s.graph, spec.cloud_points, rng);
  return s;
}

Vec3 sample_box_surface(const Vec3& b, Rng& rng) {
  const double ax = b[1] * b[2], ay = b[0] * b[2], az = b[0] * b[1];
  const double u = rng.uniform() * (ax + ay + az);
  const double s = rng.uniform() - 0.5, t = rng.uniform() - 0.5;
  const double side = rng.sign() * 0.5;
  if (u < ax) return {side * b[0], s * b[1], t * b[2]};
  if (u < ax + ay) return {s * b[0], side * b[1], t * b[2]};
  return {s * b[0], t * b[1], side * b[2]};
}

double box_area(const Vec3& b) { return 2.0 * (b[0] * b[1] + b[1] * b[2] + b[0] * b[2]); }

void require_box(const NodeAttr& node) {
  if (!node.exists) throw InvalidArgument("cannot sample an absent part");
  for (double v : node.extents) {
    if (!(v > 0.0)) throw InvalidArgument("box extents must be positive");
  }
}

}  // namespace

std::vector<Sample> synth_dataset(const SynthSpec& spec, std::size_t count, Rng& rng) {
  require_buildable(spec);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng sample_rng(rng.next_u64());
    out.push_back(build_sample(spec, sample_rng));
  }
  return out;
}

std::vector<Sample> synth_mixed(std::size_t count, std::size_t min_parts, std::size_t max_parts,
                                std::size_t cloud_points, Rng& rng) {
  std::vector<Template> usable;
  for (std::size_t k = 0; k < kTemplateCount; ++k) {
    const auto t = static_cast<Template>(k);
    const auto [lo, hi] = template_part_range(t);
    if (std::max(lo, min_parts) <= std::min(hi, max_parts)) usable.push_back(t);
  }
  if (usable.empty()) throw InvalidArgument("no template builds the requested part range");
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SynthSpec spec;
    spec.shape = usable[rng.below(usable.size())];
    const auto [lo, hi] = template_part_range(spec.shape);
    const std::size_t a = std::max(lo, min_parts), b = std::min(hi, max_parts);
    spec.part_count = a + rng.below(b - a + 1);
    spec.cloud_points = cloud_points;
    auto one = synth_dataset(spec, 1, rng);
    out.push_back(std::move(one.front()));
  }
  return out;
}

std::vector<Vec3> sample_part_points(const NodeAttr& node, std::size_t n, Rng& rng) {
  require_box(node);
  const artgraph::Rigid t = node.transform();
  std::vector<Vec3> out(n);
  for (auto& p : out) p = t.apply(sample_box_surface(node.extents, rng));
  return out;
}

namespace {

std::vector<std::size_t> split_by_area(const ArticulationGraph& g, const std::vector<std::size_t>& parts,
                                       std::size_t n) {
  std::vector<double> area;
  double total = 0.0;
  for (auto i : parts) {
    area.push_back(box_area(g.nodes[i].extents));
    total += area.back();
  }
  std::vector<std::size_t> counts(parts.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t used = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double exact = static_cast<double>(n) * area[k] / total;
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    used += counts[k];
    remainders.push_back({exact - static_cast<double>(counts[k]), k});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < n; ++r, ++used) ++counts[remainders[r % remainders.size()].second];
  return counts;
}

}  // namespace

std::vector<Vec3> sample_graph_points(const ArticulationGraph& g, const std::map<std::size_t, artgraph::Rigid>& transforms,
                                      std::size_t n, Rng& rng) {
  const auto parts = g.existing();
  if (parts.empty()) throw InvalidArgument("cannot sample a graph without parts");
  const auto counts = split_by_area(g, parts, n);
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const NodeAttr& node = g.nodes[parts[k]];
    require_box(node);
    const artgraph::Rigid& t = transforms.at(parts[k]);
    for (std::size_t i = 0; i < counts[k]; ++i) out.push_back(t.apply(sample_box_surface(node.extents, rng)));
  }
  return out;
}

PointCloud render_cloud(const ArticulationGraph& g, std::size_t n, Rng& rng) {
  const auto parts = g.existing();
  if (parts.empty()) throw InvalidArgument("cannot render a graph without parts");
  const auto counts = split_by_area(g, parts, n);
  PointCloud pc;
  pc.points.reserve(n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Vec3 color = part_color(parts[k]);
    const NodeAttr& node = g.nodes[parts[k]];
    for (const auto& p : sample_part_points(node, counts[k], rng)) {
      pc.points.push_back({p[0], p[1], p[2], color[0], color[1], color[2]});
    }
  }
  return pc;
}

}  // namespace artigen::geometry
