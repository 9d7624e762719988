#pragma once

#include <string>

#include <json.hpp>

#include "artigen/artgraph/graph.hpp"

namespace artigen::artgraph {

inline constexpr int kGraphJsonVersion = 1;

// Versioned graph document. Every slot is written, so absent parts survive a
// round trip. Doubles are printed shortest-round-trip, so the trip is exact.
nlohmann::json to_json(const ArticulationGraph& g);
ArticulationGraph from_json(const nlohmann::json& doc);

// Both require a valid tree and throw ValidationError otherwise.
std::string export_json(const ArticulationGraph& g);
ArticulationGraph import_json(const std::string& text);

// URDF 1.0. Link frames are world-aligned and sit on the axis of the joint that
// drives them (the root link at the world origin); boxes are placed by visual
// origins. A joint with both range rows live becomes a prismatic joint into a
// massless "<child>_slide" link followed by a revolute joint.
std::string export_urdf(const ArticulationGraph& g);

}  // namespace artigen::artgraph
