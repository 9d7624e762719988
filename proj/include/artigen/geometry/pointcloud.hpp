#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "artigen/artgraph/se3.hpp"
#include "artigen/numcore/autodiff.hpp"
#include "artigen/numcore/rng.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::geometry {

using artgraph::Vec3;
using artgraph::operator+;
using artgraph::operator-;
using artgraph::operator*;
using Point = std::array<double, 6>;  // x, y, z, r, g, b

struct PointCloud {
  std::vector<Point> points;

  std::size_t size() const noexcept { return points.size(); }
  Vec3 xyz(std::size_t i) const { return {points[i][0], points[i][1], points[i][2]}; }
  Vec3 rgb(std::size_t i) const { return {points[i][3], points[i][4], points[i][5]}; }
  PointCloud subset(const std::vector<std::size_t>& indices) const;
  numcore::Tensor to_tensor() const;  // N x 6
  static PointCloud from_tensor(const numcore::Tensor& t);

  bool operator==(const PointCloud&) const = default;
};

// Throws ValidationError naming the first offending point: empty cloud,
// non-finite coordinate, or a color outside [0, 1].
void require_valid(const PointCloud& pc);

// Greedy max-min selection. The first index comes from `rng`; each later pick
// has the largest squared distance to the chosen set, ties to the lowest index.
std::vector<std::size_t> fps(const PointCloud& pc, std::size_t n, numcore::Rng& rng);

// Symmetric squared Chamfer distance over xyz:
// mean_a min_b |a - b|^2 + mean_b min_a |a - b|^2.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double chamfer(const PointCloud& a, const PointCloud& b);

// Colored-cloud loss with row correspondence:
// sum_i [ |xyz_i - xyz'_i|^2 / 3 + |rgb_i - rgb'_i|^2 / 3 ].
double loss_pc(const PointCloud& p, const PointCloud& p_hat);
// Traced form over N x 6 tensors.
numcore::Var loss_pc(const numcore::Var& p, const numcore::Tensor& p_hat);

// XYZRGB text: six numbers per line. Binary: raw little-endian N x 6 doubles.
void write_cloud_text(const std::filesystem::path& path, const PointCloud& pc);
PointCloud read_cloud_text(const std::filesystem::path& path);
void write_cloud_binary(const std::filesystem::path& path, const PointCloud& pc);
PointCloud read_cloud_binary(const std::filesystem::path& path);
// Chooses the format from the extension: ".xyzrgb"/".txt" text, anything else binary.
void write_cloud(const std::filesystem::path& path, const PointCloud& pc);
PointCloud read_cloud(const std::filesystem::path& path);

}  // namespace artigen::geometry
