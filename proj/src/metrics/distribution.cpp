#include "artigen/metrics/distribution.hpp"

#include <cmath>
#include <vector>

#include "artigen/error.hpp"

namespace artigen::metrics {

namespace {

void require_distances(const Tensor& d, const char* op) {
  if (d.rank() != 2 || d.rows() == 0 || d.cols() == 0) {
    throw InvalidArgument(std::string(op) + ": need a non-empty matrix, got " + numcore::shape_string(d.shape()));
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]) || d[i] < 0.0) {
      throw InvalidArgument(std::string(op) + ": entry " + std::to_string(i) + " is " + std::to_string(d[i]));
    }
  }
}

}  // namespace

double mmd(const Tensor& gen_ref) {
  require_distances(gen_ref, "mmd");
  double total = 0.0;
  for (std::size_t c = 0; c < gen_ref.cols(); ++c) {
    double best = gen_ref(0, c);
    for (std::size_t r = 1; r < gen_ref.rows(); ++r) best = std::min(best, gen_ref(r, c));
    total += best;
  }
  return total / static_cast<double>(gen_ref.cols());
}

double cov(const Tensor& gen_ref) {
  require_distances(gen_ref, "cov");
  std::vector<bool> hit(gen_ref.cols(), false);
  for (std::size_t r = 0; r < gen_ref.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < gen_ref.cols(); ++c) {
      if (gen_ref(r, c) < gen_ref(r, best)) best = c;
    }
    hit[best] = true;
  }
  std::size_t covered = 0;
  for (bool h : hit) covered += h;
  return static_cast<double>(covered) / static_cast<double>(gen_ref.cols());
}

double one_nna(const Tensor& union_d, std::size_t generated) {
  require_distances(union_d, "one_nna");
  const std::size_t n = union_d.rows();
  if (union_d.cols() != n) throw InvalidArgument("one_nna: union matrix must be square");
  if (generated < 2 || n < generated + 2) {
    throw InvalidArgument("one_nna: need at least two generated and two reference items, got " +
                          std::to_string(generated) + " and " + std::to_string(n - std::min(n, generated)));
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i == 0 ? 1 : 0;
    for (std::size_t j = best + 1; j < n; ++j) {
      if (j != i && union_d(i, j) < union_d(i, best)) best = j;
    }
    correct += (i < generated) == (best < generated);
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace artigen::metrics
