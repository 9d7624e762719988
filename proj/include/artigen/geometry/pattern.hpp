#pragma once

#include <cstdint>

#include "artigen/geometry/pointcloud.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::geometry {

inline constexpr std::size_t kPatternDim = 1024;
inline constexpr std::size_t kPatternPoints = 64;
// Per point: xyz, rgb, radial distance, octant one-hot.
inline constexpr std::size_t kPointFeatures = 3 + 3 + 1 + 8;
inline constexpr std::size_t kPooledFeatures = 2 * kPointFeatures;
inline constexpr std::uint64_t kDefaultProjectionSeed = 0x5eed'0f'1024ULL;
inline constexpr std::uint64_t kPatternFpsSeed = 64;

// Fixed descriptor: FPS to 64 points, max and mean pooled point features,
// a seeded Gaussian projection to 1024 dims, unit L2 norm. Pure: no state and
// no caller randomness. Throws InvalidArgument for clouds under 64 points.
numcore::Tensor pattern_encode(const PointCloud& pc, std::uint64_t projection_seed = kDefaultProjectionSeed);

// The pooled 30-value summary before projection.
std::array<double, kPooledFeatures> pooled_features(const PointCloud& pc);

}  // namespace artigen::geometry
