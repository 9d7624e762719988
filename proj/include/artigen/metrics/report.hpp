#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "artigen/metrics/distance.hpp"

namespace artigen::metrics {

struct MetricValues {
  double cov = 0.0;
  double mmd = 0.0;
  double one_nna = 0.0;
  bool operator==(const MetricValues&) const = default;
};

struct EvalConfig {
  IdConfig id;  // id.seed is ignored; each run uses one entry of `seeds`
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t threads = 1;
};

struct SeedResult {
  std::uint64_t seed = 0;
  MetricValues values;
  std::string matrix_path;  // empty when matrices are not written
};

struct EvalReport {
  EvalConfig config;
  std::size_t generated = 0;
  std::size_t reference = 0;
  std::vector<SeedResult> runs;
  MetricValues mean;
  MetricValues std;  // sample standard deviation; zero for a single seed
};

// Mean and sample standard deviation per metric.
void summarize(EvalReport& report);

// Full ID matrices per seed, then COV, MMD and 1-NNA. With `matrix_dir` set,
// the union matrix of each seed is written there as distances_seed<S>.bin.
EvalReport eval_report(const std::vector<ArticulationGraph>& gen, const std::vector<ArticulationGraph>& ref,
                       const EvalConfig& cfg, const std::optional<std::filesystem::path>& matrix_dir = std::nullopt);

nlohmann::json to_json(const EvalReport& report);

// Fixed-width table with one row per label, "COV↑ MMD↓ 1-NNA↓" header,
// mean ± std cells.
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace artigen::metrics
