#include "artigen/geometry/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "artigen/error.hpp"
#include "artigen/numcore/rng.hpp"

namespace artigen::geometry {

namespace {

using Projection = std::vector<double>;  // kPatternDim x kPooledFeatures

const Projection& projection_for(std::uint64_t seed) {
  static std::mutex lock;
  static std::map<std::uint64_t, Projection> cache;
  std::lock_guard<std::mutex> guard(lock);
  auto it = cache.find(seed);
  if (it != cache.end()) return it->second;
  numcore::Rng rng(seed);
  Projection p(kPatternDim * kPooledFeatures);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kPooledFeatures));
  for (auto& v : p) v = scale * rng.normal();
  return cache.emplace(seed, std::move(p)).first->second;
}

}  // namespace

std::array<double, kPooledFeatures> pooled_features(const PointCloud& pc) {
  if (pc.size() < kPatternPoints) {
    throw InvalidArgument("pattern_encode: cloud has " + std::to_string(pc.size()) + " points, needs at least " +
                          std::to_string(kPatternPoints));
  }
  numcore::Rng rng(kPatternFpsSeed);
  const auto picked = fps(pc, kPatternPoints, rng);
  std::array<double, kPointFeatures> maxima;
  maxima.fill(-std::numeric_limits<double>::infinity());
  std::array<double, kPointFeatures> sums{};
  for (auto i : picked) {
    const Point& p = pc.points[i];
    std::array<double, kPointFeatures> f{};
    std::copy(p.begin(), p.end(), f.begin());
    f[6] = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    const std::size_t octant = (p[0] >= 0.0 ? 1 : 0) + (p[1] >= 0.0 ? 2 : 0) + (p[2] >= 0.0 ? 4 : 0);
    f[7 + octant] = 1.0;
    for (std::size_t k = 0; k < kPointFeatures; ++k) {
      maxima[k] = std::max(maxima[k], f[k]);
      sums[k] += f[k];
    }
  }
  std::array<double, kPooledFeatures> pooled{};
  for (std::size_t k = 0; k < kPointFeatures; ++k) {
    pooled[k] = maxima[k];
    pooled[kPointFeatures + k] = sums[k] / static_cast<double>(kPatternPoints);
  }
  return pooled;
}

numcore::Tensor pattern_encode(const PointCloud& pc, std::uint64_t projection_seed) {
  const auto pooled = pooled_features(pc);
  const Projection& p = projection_for(projection_seed);
  numcore::Tensor out(numcore::Shape{kPatternDim});
  double norm2 = 0.0;
  for (std::size_t r = 0; r < kPatternDim; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < kPooledFeatures; ++k) acc += p[r * kPooledFeatures + k] * pooled[k];
    out[r] = acc;
    norm2 += acc * acc;
  }
  const double norm = std::sqrt(norm2);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("pattern_encode: degenerate descriptor");
  for (auto& v : out.data()) v /= norm;
  return out;
}

}  // namespace artigen::geometry
