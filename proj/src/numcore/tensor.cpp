#include "artigen/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "artigen/error.hpp"

namespace artigen::numcore {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const noexcept {
  return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  return 1;
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

namespace {

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " + shape_string(a.shape()));
  }
}

constexpr std::size_t kBlockK = 128;
constexpr std::size_t kBlockN = 256;

// c[m x n] += a[m x k] * b[k x n], all row-major and contiguous. Rows of c are
// processed four at a time so each loaded row segment of b feeds four updates.
// Each c element accumulates its k products in increasing p order regardless of
// blocking, so results are identical to the naive triple loop order.
void gemm_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n) {
  for (std::size_t jj = 0; jj < n; jj += kBlockN) {
    const std::size_t jend = std::min(n, jj + kBlockN);
    for (std::size_t pp = 0; pp < k; pp += kBlockK) {
      const std::size_t pend = std::min(k, pp + kBlockK);
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) {
        double* __restrict c0 = c + i * n;
        double* __restrict c1 = c0 + n;
        double* __restrict c2 = c1 + n;
        double* __restrict c3 = c2 + n;
        const double* a0 = a + i * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        for (std::size_t p = pp; p < pend; ++p) {
          const double v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
          const double* __restrict brow = b + p * n;
          for (std::size_t j = jj; j < jend; ++j) {
            const double bv = brow[j];
            c0[j] += v0 * bv;
            c1[j] += v1 * bv;
            c2[j] += v2 * bv;
            c3[j] += v3 * bv;
          }
        }
      }
      for (; i < m; ++i) {
        double* __restrict crow = c + i * n;
        const double* arow = a + i * k;
        for (std::size_t p = pp; p < pend; ++p) {
          const double av = arow[p];
          const double* __restrict brow = b + p * n;
          for (std::size_t j = jj; j < jend; ++j) crow[j] += av * brow[j];
        }
      }
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor c(Shape{a.rows(), b.cols()});
  gemm_accumulate(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  Tensor t(Shape{c, r});
  constexpr std::size_t blk = 32;
  for (std::size_t ii = 0; ii < r; ii += blk) {
    for (std::size_t jj = 0; jj < c; jj += blk) {
      for (std::size_t i = ii; i < std::min(r, ii + blk); ++i) {
        for (std::size_t j = jj; j < std::min(c, jj + blk); ++j) t(j, i) = a(i, j);
      }
    }
  }
  return t;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: shape mismatch " + shape_string(a.shape()) + "^T x " + shape_string(b.shape()));
  }
  return matmul(transpose(a), b);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()) + "^T");
  }
  return matmul(a, transpose(b));
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += y[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= y[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= y[i];
  return out;
}

Tensor scaled(const Tensor& a, double factor) {
  Tensor out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

Tensor square(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v *= v;
  return out;
}

// Neumaier-compensated sum.
double sum(const Tensor& a) {
  double s = 0.0, c = 0.0;
  for (double v : a.data()) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

double mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  auto x = a.data();
  auto y = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) {
    if (std::isnan(v)) return v;
    m = std::max(m, std::abs(v));
  }
  return m;
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_matrix(p, "concat");
  const Tensor& first = parts.front();
  if (axis == 0) {
    std::size_t rows = 0;
    for (const auto& p : parts) {
      if (p.cols() != first.cols()) {
        throw ShapeError("concat: shape mismatch " + shape_string(first.shape()) + " vs " + shape_string(p.shape()));
      }
      rows += p.rows();
    }
    std::vector<double> data;
    data.reserve(rows * first.cols());
    for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
    return Tensor(Shape{rows, first.cols()}, std::move(data));
  }
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != first.rows()) {
      throw ShapeError("concat: shape mismatch " + shape_string(first.shape()) + " vs " + shape_string(p.shape()));
    }
    cols += p.cols();
  }
  Tensor out(Shape{first.rows(), cols});
  for (std::size_t r = 0; r < first.rows(); ++r) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      std::copy_n(p.data().begin() + static_cast<std::ptrdiff_t>(r * p.cols()), p.cols(),
                  out.data().begin() + static_cast<std::ptrdiff_t>(r * cols + offset));
      offset += p.cols();
    }
  }
  return out;
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  require_matrix(a, "slice");
  if (axis > 1) throw ShapeError("slice: axis must be 0 or 1");
  const std::size_t extent = axis == 0 ? a.rows() : a.cols();
  if (begin >= end || end > extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for shape " + shape_string(a.shape()) + " along axis " + std::to_string(axis));
  }
  if (axis == 0) {
    const auto first = a.data().begin() + static_cast<std::ptrdiff_t>(begin * a.cols());
    const auto last = a.data().begin() + static_cast<std::ptrdiff_t>(end * a.cols());
    return Tensor(Shape{end - begin, a.cols()}, std::vector<double>(first, last));
  }
  const std::size_t width = end - begin;
  Tensor out(Shape{a.rows(), width});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out(r, c) = a(r, begin + c);
  }
  return out;
}

namespace {

enum class BroadcastKind { kScalar, kRow, kColumn, kSame };

BroadcastKind broadcast_kind(const Shape& from, const Shape& to) {
  if (from == to) return BroadcastKind::kSame;
  if (shape_size(from) == 1) return BroadcastKind::kScalar;
  if (to.size() == 2 && from.size() == 2) {
    if (from[0] == 1 && from[1] == to[1]) return BroadcastKind::kRow;
    if (from[1] == 1 && from[0] == to[0]) return BroadcastKind::kColumn;
  }
  if (to.size() == 2 && from.size() == 1 && from[0] == to[1]) return BroadcastKind::kRow;
  throw ShapeError("broadcast: cannot expand " + shape_string(from) + " to " + shape_string(to));
}

}  // namespace

Tensor broadcast(const Tensor& a, const Shape& shape) {
  const auto kind = broadcast_kind(a.shape(), shape);
  Tensor out(shape);
  switch (kind) {
    case BroadcastKind::kSame:
      return a;
    case BroadcastKind::kScalar:
      std::fill(out.data().begin(), out.data().end(), a[0]);
      break;
    case BroadcastKind::kRow:
      for (std::size_t r = 0; r < shape[0]; ++r) {
        for (std::size_t c = 0; c < shape[1]; ++c) out(r, c) = a[c];
      }
      break;
    case BroadcastKind::kColumn:
      for (std::size_t r = 0; r < shape[0]; ++r) {
        for (std::size_t c = 0; c < shape[1]; ++c) out(r, c) = a[r];
      }
      break;
  }
  return out;
}

Tensor reduce_to(const Tensor& grad, const Shape& shape) {
  const auto kind = broadcast_kind(shape, grad.shape());
  Tensor out(shape);
  switch (kind) {
    case BroadcastKind::kSame:
      return grad;
    case BroadcastKind::kScalar:
      out[0] = sum(grad);
      break;
    case BroadcastKind::kRow:
      for (std::size_t r = 0; r < grad.rows(); ++r) {
        for (std::size_t c = 0; c < grad.cols(); ++c) out[c] += grad(r, c);
      }
      break;
    case BroadcastKind::kColumn:
      for (std::size_t r = 0; r < grad.rows(); ++r) {
        for (std::size_t c = 0; c < grad.cols(); ++c) out[r] += grad(r, c);
      }
      break;
  }
  return out;
}

}  // namespace artigen::numcore
