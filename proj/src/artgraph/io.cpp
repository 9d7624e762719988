#include "artigen/artgraph/io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "artigen/artgraph/ops.hpp"
#include "artigen/error.hpp"

namespace artigen::artgraph {

using nlohmann::json;

namespace {

template <std::size_t N>
std::array<double, N> read_array(const json& j, const char* field) {
  if (!j.is_array() || j.size() != N) {
    throw ValidationError(std::string("graph json: field '") + field + "' must have " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) {
    if (!j[k].is_number()) throw ValidationError(std::string("graph json: field '") + field + "' is not numeric");
    out[k] = j[k].get<double>();
  }
  return out;
}

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ValidationError(std::string("graph json: missing field '") + name + "'");
  return *it;
}

}  // namespace

json to_json(const ArticulationGraph& g) {
  json parts = json::array();
  for (std::size_t i = 0; i < kMaxParts; ++i) {
    const NodeAttr& n = g.nodes[i];
    parts.push_back({{"slot", i}, {"o", n.exists ? 1 : 0}, {"Tg", n.pose}, {"b", n.extents}, {"f", n.latent}});
  }
  json joints = json::array();
  for (const auto& [pair, e] : g.edges) {
    joints.push_back({{"pair", {pair.first, pair.second}},
                      {"c", e.chirality},
                      {"plucker", e.plucker},
                      {"range", {e.range[kPrismatic], e.range[kRevolute]}}});
  }
  return {{"format", "artigen-graph"}, {"version", kGraphJsonVersion}, {"label", g.label},
          {"parts", parts},            {"joints", joints}};
}

ArticulationGraph from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "artigen-graph") {
    throw ValidationError("graph json: not an artigen-graph document");
  }
  if (doc.value("version", -1) != kGraphJsonVersion) {
    throw ValidationError("graph json: unsupported version " + field(doc, "version").dump());
  }
  ArticulationGraph g;
  g.label = doc.value("label", "");
  const json& parts = field(doc, "parts");
  if (!parts.is_array() || parts.size() != kMaxParts) {
    throw ValidationError("graph json: 'parts' must list " + std::to_string(kMaxParts) + " slots");
  }
  for (std::size_t i = 0; i < kMaxParts; ++i) {
    const json& p = parts[i];
    if (field(p, "slot").get<std::size_t>() != i) throw ValidationError("graph json: parts out of slot order");
    NodeAttr& n = g.nodes[i];
    n.exists = field(p, "o").get<int>() != 0;
    n.pose = read_array<6>(field(p, "Tg"), "Tg");
    n.extents = read_array<3>(field(p, "b"), "b");
    n.latent = read_array<kLatentDim>(field(p, "f"), "f");
  }
  for (const json& j : field(doc, "joints")) {
    const auto pair = field(j, "pair").get<std::array<std::size_t, 2>>();
    EdgeAttr e;
    e.chirality = field(j, "c").get<int>();
    e.plucker = read_array<6>(field(j, "plucker"), "plucker");
    const json& range = field(j, "range");
    if (!range.is_array() || range.size() != 2) throw ValidationError("graph json: 'range' must be 2x2");
    e.range[kPrismatic] = read_array<2>(range[0], "range");
    e.range[kRevolute] = read_array<2>(range[1], "range");
    const Pair key = make_pair_ordered(pair[0], pair[1]);
    if (key.first != pair[0]) throw ValidationError("graph json: joint pair must be ordered i < j");
    if (!g.edges.emplace(key, e).second) throw ValidationError("graph json: duplicate joint");
  }
  return g;
}

std::string export_json(const ArticulationGraph& g) {
  require_valid(g, "export_json");
  return to_json(g).dump(1) + "\n";
}

ArticulationGraph import_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("graph json: parse error: ") + e.what());
  }
  ArticulationGraph g;
  try {
    g = from_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("graph json: ") + e.what());
  }
  require_valid(g, "import_json");
  return g;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << (v == 0.0 ? 0.0 : v);
  return s.str();
}

std::string triple(const Vec3& v) { return fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(v[2]); }

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string link_name(std::size_t i) { return "part_" + std::to_string(i); }

void emit_link(std::ostream& out, std::size_t i, const NodeAttr& n, const Vec3& frame_origin) {
  const Rigid t = n.transform();
  out << "  <link name=\"" << link_name(i) << "\">\n"
      << "    <visual>\n"
      << "      <origin xyz=\"" << triple(t.translation - frame_origin) << "\" rpy=\"" << triple(to_rpy(t.rotation))
      << "\"/>\n"
      << "      <geometry><box size=\"" << triple(n.extents) << "\"/></geometry>\n"
      << "    </visual>\n"
      << "  </link>\n";
}

void emit_joint(std::ostream& out, const std::string& name, const char* type, const std::string& parent,
                const std::string& child, const Vec3& origin, const Vec3& axis, const Range* limit) {
  out << "  <joint name=\"" << name << "\" type=\"" << type << "\">\n"
      << "    <parent link=\"" << parent << "\"/>\n"
      << "    <child link=\"" << child << "\"/>\n"
      << "    <origin xyz=\"" << triple(origin) << "\" rpy=\"0 0 0\"/>\n";
  if (limit != nullptr) {
    out << "    <axis xyz=\"" << triple(axis) << "\"/>\n"
        << "    <limit lower=\"" << fmt((*limit)[0]) << "\" upper=\"" << fmt((*limit)[1])
        << "\" effort=\"1\" velocity=\"1\"/>\n";
  }
  out << "  </joint>\n";
}

}  // namespace

std::string export_urdf(const ArticulationGraph& g) {
  require_valid(g, "export_urdf");
  const auto steps = tree_order(g);
  std::array<Vec3, kMaxParts> frame{};
  for (const auto& s : steps) frame[s.child] = g.edges.at(s.joint).axis().closest_point();

  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n"
      << "<robot name=\"" << xml_escape(g.label.empty() ? std::string("artigen_object") : g.label) << "\">\n";
  for (auto i : g.existing()) emit_link(out, i, g.nodes[i], frame[i]);
  for (const auto& s : steps) {
    const EdgeAttr& e = g.edges.at(s.joint);
    const Plucker axis = e.axis();
    const Vec3 origin = frame[s.child] - frame[s.parent];
    const Vec3 spin = static_cast<double>(e.chirality) * axis.direction;
    const std::string base = "joint_" + std::to_string(s.joint.first) + "_" + std::to_string(s.joint.second);
    const std::string parent = link_name(s.parent), child = link_name(s.child);
    switch (joint_kind(e)) {
      case JointKind::kFixed:
        emit_joint(out, base, "fixed", parent, child, origin, axis.direction, nullptr);
        break;
      case JointKind::kPrismatic:
        emit_joint(out, base, "prismatic", parent, child, origin, axis.direction, &e.range[kPrismatic]);
        break;
      case JointKind::kRevolute:
        emit_joint(out, base, "revolute", parent, child, origin, spin, &e.range[kRevolute]);
        break;
      case JointKind::kScrew: {
        const std::string slide = child + "_slide";
        out << "  <link name=\"" << slide << "\"/>\n";
        emit_joint(out, base + "_prismatic", "prismatic", parent, slide, origin, axis.direction, &e.range[kPrismatic]);
        emit_joint(out, base + "_revolute", "revolute", slide, child, {0, 0, 0}, spin, &e.range[kRevolute]);
        break;
      }
    }
  }
  out << "</robot>\n";
  return out.str();
}

}  // namespace artigen::artgraph
