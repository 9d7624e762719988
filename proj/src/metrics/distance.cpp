#include "artigen/metrics/distance.hpp"

#include <algorithm>
#include <thread>

#include "artigen/artgraph/ops.hpp"
#include "artigen/error.hpp"
#include "artigen/geometry/pointcloud.hpp"
#include "artigen/geometry/synth.hpp"
#include "artigen/numcore/binary_io.hpp"

namespace artigen::metrics {

namespace {

using artgraph::kPrismatic;
using artgraph::kRevolute;
using numcore::Shape;

constexpr const char* kMatrixMagic = "ARTGDIST";
constexpr int kMatrixVersion = 1;

double draw_within(const artgraph::Range& r, double u) { return r[1] - r[0] >= artgraph::kDegenerateRange ? r[0] + u * (r[1] - r[0]) : 0.0; }

// Calls fn(r) for r = first, first + stride, ... below count on `threads`
// workers.
template <class Fn>
void parallel_rows(std::size_t count, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t r = w; r < count; r += threads) fn(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void require_valid(const IdConfig& cfg) {
  if (cfg.poses < 1) throw InvalidArgument("instantiation distance needs at least one pose");
  if (cfg.points < 16) {
    throw InvalidArgument("instantiation distance needs at least 16 points, got " + std::to_string(cfg.points));
  }
}

Instantiation instantiate(const ArticulationGraph& g, const IdConfig& cfg) {
  require_valid(cfg);
  artgraph::require_valid(g, "instantiate");
  const numcore::Rng root(cfg.seed);
  Instantiation out;
  out.poses.reserve(cfg.poses);
  for (std::size_t j = 0; j < cfg.poses; ++j) {
    numcore::Rng rng = root.split(j);
    artgraph::PoseState pose;
    for (const auto& [pair, edge] : g.edges) {
      const double u_d = rng.uniform(), u_a = rng.uniform();
      pose[pair] = {draw_within(edge.range[kPrismatic], u_d), draw_within(edge.range[kRevolute], u_a)};
    }
    out.poses.push_back(geometry::sample_graph_points(g, artgraph::forward_kinematics(g, pose), cfg.points, rng));
  }
  return out;
}

double instantiation_distance(const Instantiation& a, const Instantiation& b) {
  if (a.poses.empty() || a.poses.size() != b.poses.size()) {
    throw InvalidArgument("instantiation distance: pose counts " + std::to_string(a.poses.size()) + " and " +
                          std::to_string(b.poses.size()));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < a.poses.size(); ++j) total += geometry::chamfer(a.poses[j], b.poses[j]);
  return total / static_cast<double>(a.poses.size());
}

double instantiation_distance(const ArticulationGraph& a, const ArticulationGraph& b, const IdConfig& cfg) {
  return instantiation_distance(instantiate(a, cfg), instantiate(b, cfg));
}

Tensor distance_matrix(const std::vector<Instantiation>& rows, const std::vector<Instantiation>& cols,
                       std::size_t threads) {
  Tensor d(Shape{rows.size(), cols.size()});
  parallel_rows(rows.size(), threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < cols.size(); ++c) d(r, c) = instantiation_distance(rows[r], cols[c]);
  });
  return d;
}

Tensor self_distance_matrix(const std::vector<Instantiation>& items, std::size_t threads) {
  const std::size_t n = items.size();
  Tensor d(Shape{n, n});
  parallel_rows(n, threads, [&](std::size_t r) {
    for (std::size_t c = r + 1; c < n; ++c) d(r, c) = instantiation_distance(items[r], items[c]);
  });
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < r; ++c) d(r, c) = d(c, r);
  }
  return d;
}

Tensor union_matrix(const Tensor& gen_gen, const Tensor& gen_ref, const Tensor& ref_ref) {
  const std::size_t g = gen_ref.rows(), r = gen_ref.cols();
  if (gen_gen.shape() != Shape{g, g} || ref_ref.shape() != Shape{r, r}) {
    throw ShapeError("union_matrix: blocks " + numcore::shape_string(gen_gen.shape()) + ", " +
                     numcore::shape_string(gen_ref.shape()) + ", " + numcore::shape_string(ref_ref.shape()) +
                     " do not fit");
  }
  Tensor u(Shape{g + r, g + r});
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) u(i, j) = gen_gen(i, j);
    for (std::size_t j = 0; j < r; ++j) u(i, g + j) = u(g + j, i) = gen_ref(i, j);
  }
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) u(g + i, g + j) = ref_ref(i, j);
  }
  return u;
}

void save_distance_matrix(const std::filesystem::path& path, const Tensor& d, const MatrixInfo& info) {
  if (d.rank() != 2) throw ShapeError("save_distance_matrix: need a matrix, got " + numcore::shape_string(d.shape()));
  numcore::BlobFile blob;
  blob.header = {{"format", "artigen-distances"}, {"version", kMatrixVersion}, {"rows", d.rows()},
                 {"cols", d.cols()}, {"generated", info.generated}, {"poses", info.id.poses},
                 {"points", info.id.points}, {"seed", info.id.seed}, {"layout", "row-major f64"}};
  blob.payload.assign(d.data().begin(), d.data().end());
  numcore::write_blob(path, kMatrixMagic, blob);
}

Tensor load_distance_matrix(const std::filesystem::path& path, MatrixInfo* info) {
  const auto blob = numcore::read_blob(path, kMatrixMagic);
  std::size_t rows = 0, cols = 0;
  MatrixInfo meta;
  try {
    if (blob.header.at("version").get<int>() != kMatrixVersion) throw IoError(path.string() + ": unsupported version");
    rows = blob.header.at("rows").get<std::size_t>();
    cols = blob.header.at("cols").get<std::size_t>();
    meta.generated = blob.header.at("generated").get<std::size_t>();
    meta.id.poses = blob.header.at("poses").get<std::size_t>();
    meta.id.points = blob.header.at("points").get<std::size_t>();
    meta.id.seed = blob.header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(path.string() + ": bad distance matrix header: " + ex.what());
  }
  if (blob.payload.size() != rows * cols) {
    throw IoError(path.string() + ": payload has " + std::to_string(blob.payload.size()) + " values, expected " +
                  std::to_string(rows * cols));
  }
  if (info) *info = meta;
  return Tensor(Shape{rows, cols}, blob.payload);
}

}  // namespace artigen::metrics
