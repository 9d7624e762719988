#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "artigen/hypernet/extractor.hpp"
#include "artigen/jointdiff/denoiser.hpp"
#include "artigen/metrics/distance.hpp"
#include "artigen/numcore/rng.hpp"

namespace artigen::pipeline {

struct Paths {
  std::filesystem::path dataset = "data/dataset";
  std::filesystem::path checkpoints = "data/checkpoints";
  std::filesystem::path output = "data/generated";
};

struct SynthSettings {
  std::size_t count = 200;
  std::size_t min_parts = 2;
  std::size_t max_parts = 4;
  std::size_t cloud_points = 2048;
};

struct ExtractSettings {
  hypernet::ExtractorConfig model;
  std::size_t fps_points = 1024;  // clouds are reduced to this many points before pattern_encode
  std::size_t holdout = 50;       // trailing dataset samples kept out of training
  std::size_t checkpoint_every = 500;
};

struct DiffuseSettings {
  jointdiff::DiffusionConfig model;
  std::size_t checkpoint_every = 500;
};

struct GenerateSettings {
  std::size_t count = 20;
  std::string label = "cabinet_door";
};

struct EvalSettings {
  metrics::IdConfig id;  // id.seed is unused; run seeds come from the eval stream
  std::size_t runs = 5;
  std::size_t threads = 1;
};

struct RunConfig {
  std::uint64_t seed = 0;
  Paths paths;
  SynthSettings synth;
  ExtractSettings extract;
  DiffuseSettings diffuse;
  GenerateSettings generate;
  EvalSettings eval;
};

// Sections [run] [paths] [synth] [extract] [diffuse] [generate] [eval] with
// key = value lines. Unknown sections or keys and malformed values throw
// InvalidArgument naming the key. Missing keys keep their defaults.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);
// Applies one "section.key=value" override.
void apply_override(RunConfig& cfg, const std::string& assignment);
// Throws InvalidArgument for values no stage can run with.
void require_valid(const RunConfig& cfg);

// Every setting except paths, which never change numeric output.
nlohmann::json to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);
// Every setting, paths included, in the form parse_config reads.
std::string to_ini(const RunConfig& cfg);

enum class Stage : std::uint64_t { kSynth = 1, kExtract = 2, kDiffuse = 3, kGenerate = 4, kEval = 5 };
// Independent stream of the root seed per stage.
numcore::Rng stage_rng(const RunConfig& cfg, Stage stage);

}  // namespace artigen::pipeline
