#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "artigen/numcore/checkpoint.hpp"
#include "artigen/numcore/params.hpp"
#include "artigen/numcore/rng.hpp"

namespace artigen::numcore {

// Everything a trainer needs to continue exactly where it stopped.
struct TrainState {
  ParamSet params;
  std::size_t iteration = 0;
  std::vector<double> losses;
  Rng rng{0};
};

// Packs the iteration, loss history and generator position into `meta`.
Checkpoint to_checkpoint(const TrainState& state, const std::string& module_name);
TrainState from_checkpoint(const Checkpoint& ckpt);

// `count` distinct indices from [0, n) by partial Fisher-Yates; all of them in
// order when count >= n.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Rng& rng);

}  // namespace artigen::numcore
