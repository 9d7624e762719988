#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "artigen/numcore/params.hpp"

namespace artigen::numcore {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Parameters plus Adam state and free-form metadata (iteration, rng position,
// config hash). The config itself goes to a JSON sidecar at `<path>.json`.
struct Checkpoint {
  std::string module_name;
  ParamSet params;
  nlohmann::json meta = nlohmann::json::object();
};

// Layout: "ARTGCKPT", u32 format_version, u64 header length, JSON header
// {format_version, module_name, params: [{name, shape, step}], meta}, then for
// each parameter in header order: value, first moment, second moment as raw
// little-endian f64.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, const nlohmann::json& config);
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_module = {});
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

}  // namespace artigen::numcore
