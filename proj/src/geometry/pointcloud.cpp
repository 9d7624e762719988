#include "artigen/geometry/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "artigen/error.hpp"
#include "artigen/numcore/binary_io.hpp"

namespace artigen::geometry {

using numcore::Tensor;

PointCloud PointCloud::subset(const std::vector<std::size_t>& indices) const {
  PointCloud out;
  out.points.reserve(indices.size());
  for (auto i : indices) out.points.push_back(points.at(i));
  return out;
}

Tensor PointCloud::to_tensor() const {
  Tensor t(numcore::Shape{points.size(), 6});
  for (std::size_t i = 0; i < points.size(); ++i) std::copy(points[i].begin(), points[i].end(), &t(i, 0));
  return t;
}

PointCloud PointCloud::from_tensor(const Tensor& t) {
  if (t.rank() != 2 || t.cols() != 6) {
    throw ShapeError("point cloud tensor must be N x 6, got " + numcore::shape_string(t.shape()));
  }
  PointCloud pc;
  pc.points.resize(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) std::copy_n(t.data().begin() + 6 * i, 6, pc.points[i].begin());
  return pc;
}

void require_valid(const PointCloud& pc) {
  if (pc.points.empty()) throw ValidationError("point cloud is empty");
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Point& p = pc.points[i];
    for (int k = 0; k < 6; ++k) {
      if (!std::isfinite(p[k])) throw ValidationError("point " + std::to_string(i) + " has a non-finite value");
    }
    for (int k = 3; k < 6; ++k) {
      if (p[k] < 0.0 || p[k] > 1.0) throw ValidationError("point " + std::to_string(i) + " has a color outside [0, 1]");
    }
  }
}

std::vector<std::size_t> fps(const PointCloud& pc, std::size_t n, numcore::Rng& rng) {
  const std::size_t count = pc.size();
  if (n < 1 || n > count) {
    throw InvalidArgument("fps: cannot pick " + std::to_string(n) + " of " + std::to_string(count) + " points");
  }
  std::vector<double> x(count), y(count), z(count);
  for (std::size_t i = 0; i < count; ++i) {
    x[i] = pc.points[i][0];
    y[i] = pc.points[i][1];
    z[i] = pc.points[i][2];
  }
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::size_t current = rng.below(count);
  for (std::size_t step = 0; step < n; ++step) {
    picked.push_back(current);
    const double cx = x[current], cy = y[current], cz = z[current];
    for (std::size_t i = 0; i < count; ++i) {
      const double dx = x[i] - cx, dy = y[i] - cy, dz = z[i] - cz;
      nearest[i] = std::min(nearest[i], dx * dx + dy * dy + dz * dz);
    }
    nearest[current] = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i) {
      if (nearest[i] > nearest[best]) best = i;
    }
    current = best;
  }
  return picked;
}

namespace {

struct Soa {
  std::vector<double> x, y, z;
  explicit Soa(const std::vector<Vec3>& pts) : x(pts.size()), y(pts.size()), z(pts.size()) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      x[i] = pts[i][0];
      y[i] = pts[i][1];
      z[i] = pts[i][2];
    }
  }
};

}  // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("chamfer: empty point set");
  const Soa sb(b);
  const std::size_t nb = b.size();
  std::vector<double> best_b(nb, std::numeric_limits<double>::infinity());
  std::vector<double> row(nb);
  double sum_a = 0.0;
  for (const auto& p : a) {
    const double px = p[0], py = p[1], pz = p[2];
    for (std::size_t j = 0; j < nb; ++j) {
      const double dx = sb.x[j] - px, dy = sb.y[j] - py, dz = sb.z[j] - pz;
      row[j] = dx * dx + dy * dy + dz * dz;
    }
    for (std::size_t j = 0; j < nb; ++j) best_b[j] = std::min(best_b[j], row[j]);
    double m0 = row[0], m1 = row[0], m2 = row[0], m3 = row[0];
    std::size_t j = 0;
    for (; j + 4 <= nb; j += 4) {
      m0 = std::min(m0, row[j]);
      m1 = std::min(m1, row[j + 1]);
      m2 = std::min(m2, row[j + 2]);
      m3 = std::min(m3, row[j + 3]);
    }
    for (; j < nb; ++j) m0 = std::min(m0, row[j]);
    sum_a += std::min(std::min(m0, m1), std::min(m2, m3));
  }
  double sum_b = 0.0;
  for (double v : best_b) sum_b += v;
  return sum_a / static_cast<double>(a.size()) + sum_b / static_cast<double>(nb);
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  std::vector<Vec3> xa(a.size()), xb(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) xa[i] = a.xyz(i);
  for (std::size_t i = 0; i < b.size(); ++i) xb[i] = b.xyz(i);
  return chamfer(xa, xb);
}

double loss_pc(const PointCloud& p, const PointCloud& p_hat) {
  if (p.size() != p_hat.size()) {
    throw ShapeError("loss_pc: clouds have " + std::to_string(p.size()) + " and " + std::to_string(p_hat.size()) +
                     " points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double xyz = 0.0, rgb = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = p.points[i][k] - p_hat.points[i][k];
      xyz += d * d;
    }
    for (int k = 3; k < 6; ++k) {
      const double d = p.points[i][k] - p_hat.points[i][k];
      rgb += d * d;
    }
    total += xyz / 3.0 + rgb / 3.0;
  }
  return total;
}

numcore::Var loss_pc(const numcore::Var& p, const Tensor& p_hat) {
  if (p.shape().size() != 2 || p.shape()[1] != 6) {
    throw ShapeError("loss_pc: prediction must be N x 6, got " + numcore::shape_string(p.shape()));
  }
  numcore::require_same_shape(p.value(), p_hat, "loss_pc");
  auto diff = numcore::sub(p, p.tape().constant(p_hat));
  return numcore::scale(numcore::sum(numcore::square(diff)), 1.0 / 3.0);
}

void write_cloud_text(const std::filesystem::path& path, const PointCloud& pc) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : pc.points) {
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << p[3] << ' ' << p[4] << ' ' << p[5] << '\n';
  }
  numcore::write_text_file(path, out.str());
}

PointCloud read_cloud_text(const std::filesystem::path& path) {
  std::istringstream in(numcore::read_text_file(path));
  PointCloud pc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    Point p{};
    for (auto& v : p) {
      if (!(fields >> v)) throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 6 numbers");
    }
    std::string extra;
    if (fields >> extra) throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 6 numbers");
    pc.points.push_back(p);
  }
  require_valid(pc);
  return pc;
}

void write_cloud_binary(const std::filesystem::path& path, const PointCloud& pc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : pc.points) numcore::write_f64s(out, p);
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_cloud_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const auto bytes = std::filesystem::file_size(path);
  if (bytes % (6 * sizeof(double)) != 0) {
    throw IoError(path.string() + ": size " + std::to_string(bytes) + " is not a multiple of 48 bytes");
  }
  const auto values = numcore::read_f64s(in, bytes / sizeof(double));
  PointCloud pc;
  pc.points.resize(values.size() / 6);
  for (std::size_t i = 0; i < pc.size(); ++i) std::copy_n(values.begin() + 6 * i, 6, pc.points[i].begin());
  require_valid(pc);
  return pc;
}

namespace {

bool is_text_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".xyzrgb" || ext == ".txt";
}

}  // namespace

void write_cloud(const std::filesystem::path& path, const PointCloud& pc) {
  if (is_text_path(path)) {
    write_cloud_text(path, pc);
  } else {
    write_cloud_binary(path, pc);
  }
}

PointCloud read_cloud(const std::filesystem::path& path) {
  return is_text_path(path) ? read_cloud_text(path) : read_cloud_binary(path);
}

}  // namespace artigen::geometry
