#pragma once

#include <cstddef>

#include "artigen/numcore/tensor.hpp"

namespace artigen::metrics {

using numcore::Tensor;

// All three take rows = generated items and columns = reference items, and
// throw InvalidArgument on an empty side or a negative or non-finite entry.

// Mean over reference items of the distance to the closest generated item.
double mmd(const Tensor& gen_ref);

// Fraction of reference items that are the nearest reference (lowest index on
// ties) of at least one generated item.
double cov(const Tensor& gen_ref);

// Leave-one-out 1-nearest-neighbour accuracy over the union of `generated`
// items followed by reference items, neighbour ties to the lowest index.
// Needs at least two items on each side.
double one_nna(const Tensor& union_d, std::size_t generated);

}  // namespace artigen::metrics
