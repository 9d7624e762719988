#include "artigen/numcore/train_state.hpp"

#include <numeric>

#include "artigen/error.hpp"

namespace artigen::numcore {

Checkpoint to_checkpoint(const TrainState& state, const std::string& module_name) {
  Checkpoint ckpt;
  ckpt.module_name = module_name;
  ckpt.params = state.params;
  ckpt.meta["iteration"] = state.iteration;
  ckpt.meta["losses"] = state.losses;
  ckpt.meta["rng_key"] = state.rng.key();
  ckpt.meta["rng_position"] = state.rng.position();
  return ckpt;
}

TrainState from_checkpoint(const Checkpoint& ckpt) {
  TrainState state;
  state.params = ckpt.params;
  try {
    state.iteration = ckpt.meta.at("iteration").get<std::size_t>();
    state.losses = ckpt.meta.at("losses").get<std::vector<double>>();
    state.rng = Rng::from_state(ckpt.meta.at("rng_key").get<std::uint64_t>(),
                                ckpt.meta.at("rng_position").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint has no training state: ") + e.what());
  }
  if (state.losses.size() != state.iteration) throw IoError("checkpoint loss history does not match its iteration");
  return state;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count >= n) return idx;
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(count);
  return idx;
}

}  // namespace artigen::numcore
