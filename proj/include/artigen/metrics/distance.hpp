#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "artigen/artgraph/graph.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::metrics {

using artgraph::ArticulationGraph;
using artgraph::Vec3;
using numcore::Tensor;

struct IdConfig {
  std::size_t poses = 4;     // J
  std::size_t points = 2048;  // N_s
  std::uint64_t seed = 0;
};

// Throws InvalidArgument unless J >= 1 and N_s >= 16.
void require_valid(const IdConfig& cfg);

// J surface samples of a graph, the j-th taken at a pose drawn uniformly
// within every joint's ranges. Stream j of the seed drives both the pose and
// the points, so two graphs with the same joint layout share their draws.
struct Instantiation {
  std::vector<std::vector<Vec3>> poses;
};
Instantiation instantiate(const ArticulationGraph& g, const IdConfig& cfg);

// Mean Chamfer over paired poses. Symmetric in its arguments and zero for
// identical graphs since each side's draws depend only on its own graph.
double instantiation_distance(const Instantiation& a, const Instantiation& b);
double instantiation_distance(const ArticulationGraph& a, const ArticulationGraph& b, const IdConfig& cfg);

// Entry (r, c) is the distance between rows[r] and cols[c]. Entries are
// independent, so `threads` only changes wall time (0 picks the hardware
// count).
Tensor distance_matrix(const std::vector<Instantiation>& rows, const std::vector<Instantiation>& cols,
                       std::size_t threads = 1);
// Symmetric matrix over one set with a zero diagonal.
Tensor self_distance_matrix(const std::vector<Instantiation>& items, std::size_t threads = 1);

// Union matrix for 1-NNA: generated items first, then reference items.
Tensor union_matrix(const Tensor& gen_gen, const Tensor& gen_ref, const Tensor& ref_ref);

struct MatrixInfo {
  std::size_t generated = 0;
  IdConfig id;
};
// Blob with magic "ARTGDIST": JSON header (shape, generated count, ID
// settings) and the row-major f64 entries.
void save_distance_matrix(const std::filesystem::path& path, const Tensor& d, const MatrixInfo& info);
Tensor load_distance_matrix(const std::filesystem::path& path, MatrixInfo* info = nullptr);

}  // namespace artigen::metrics
