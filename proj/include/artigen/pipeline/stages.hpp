#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "artigen/error.hpp"
#include "artigen/geometry/synth.hpp"
#include "artigen/metrics/report.hpp"
#include "artigen/pipeline/config.hpp"

namespace artigen::pipeline {

using numcore::Tensor;
using Logger = std::function<void(const std::string&)>;

// A failure inside one pipeline stage for one sample.
class StageError : public Error {
 public:
  StageError(std::string stage, std::size_t index, const std::string& what, bool numerical)
      : Error("sample " + std::to_string(index) + ": " + stage + ": " + what),
        stage_(std::move(stage)),
        index_(index),
        numerical_(numerical) {}
  const std::string& stage() const noexcept { return stage_; }
  std::size_t index() const noexcept { return index_; }
  bool numerical() const noexcept { return numerical_; }

 private:
  std::string stage_;
  std::size_t index_;
  bool numerical_;
};

// ---- dataset ---------------------------------------------------------------

std::vector<geometry::Sample> synthesize(const RunConfig& cfg);

// One sample of a template with the part count drawn uniformly over the
// template's range clipped to [min_parts, max_parts].
geometry::Sample synth_for_label(geometry::Template t, std::size_t min_parts, std::size_t max_parts,
                                 std::size_t cloud_points, numcore::Rng& rng);

// <dir>/manifest.json plus graphs/NNNNNN.json and clouds/NNNNNN.bin. The
// manifest lists {graph_file, cloud_file, label} per sample; graph documents
// carry the config hash.
void write_dataset(const std::filesystem::path& dir, const std::vector<geometry::Sample>& samples,
                   const RunConfig& cfg);
// Throws IoError naming the file for a missing or malformed entry.
std::vector<geometry::Sample> read_dataset(const std::filesystem::path& dir);

struct Split {
  std::vector<geometry::Sample> train;
  std::vector<geometry::Sample> holdout;
};
// The trailing `holdout` samples are held out.
Split split_dataset(std::vector<geometry::Sample> samples, std::size_t holdout);

// Farthest point reduction to `fps_points` from a fixed start, then
// pattern_encode. Pure in the cloud.
Tensor encode_cloud(const geometry::PointCloud& pc, std::size_t fps_points);

// ---- training --------------------------------------------------------------

struct CheckpointFiles {
  std::filesystem::path checkpoint;
  std::filesystem::path losses;
  std::filesystem::path hypergraph;  // extractor only
};
CheckpointFiles extractor_files(const RunConfig& cfg);
CheckpointFiles denoiser_files(const RunConfig& cfg);

// Trains on the training split and writes the checkpoint (every
// checkpoint_every iterations and at the end) and a loss CSV with one row per
// iteration. With `resume`, continues from the checkpoint on disk; the result
// matches an uninterrupted run bit for bit.
hypernet::ExtractorModel train_extract_stage(const RunConfig& cfg, const std::vector<geometry::Sample>& train,
                                             bool resume, const Logger& log = {});
numcore::ParamSet train_diffuse_stage(const RunConfig& cfg, const std::vector<geometry::Sample>& train, bool resume,
                                      const Logger& log = {});

hypernet::ExtractorModel load_extractor(const RunConfig& cfg);
numcore::ParamSet load_denoiser(const RunConfig& cfg);

std::vector<Tensor> extractor_vectors(const std::vector<geometry::Sample>& samples, std::size_t fps_points);
std::vector<jointdiff::DiffusionExample> diffusion_examples(const std::vector<geometry::Sample>& samples);

// ---- generation ------------------------------------------------------------

struct Models {
  hypernet::ExtractorModel extractor;
  numcore::ParamSet denoiser;
  jointdiff::NoiseSchedule schedule;  // respaced to sample_steps
};
Models load_models(const RunConfig& cfg);
jointdiff::NoiseSchedule sampling_schedule(const RunConfig& cfg);

struct Generated {
  artgraph::ArticulationGraph graph;
  Tensor vertices;
  Tensor edges;
};
// Cloud -> pattern vector -> vertex matrix -> sampled edges -> tree. Throws
// StageError naming the stage that failed.
Generated generate_one(const geometry::PointCloud& cloud, const Models& models, const RunConfig& cfg,
                       std::size_t index, numcore::Rng& rng);

struct GenerateOptions {
  bool urdf = false;
  std::optional<std::filesystem::path> cloud;  // ingest instead of synthesizing
};
struct GenerateSummary {
  std::size_t written = 0;
  std::vector<std::string> failures;
  bool numerical_failure = false;
};
// Writes <output>/graphs/<label>_NNN.json (and urdf/<label>_NNN.urdf) plus
// <output>/generation.json.
GenerateSummary generate_stage(const RunConfig& cfg, const Models& models, const GenerateOptions& opts,
                               const Logger& log = {});

// ---- evaluation ------------------------------------------------------------

// Every graph document in `dir` (or its graphs/ subdirectory), by file name.
std::vector<artgraph::ArticulationGraph> read_graph_dir(const std::filesystem::path& dir);
std::vector<std::uint64_t> eval_seeds(const RunConfig& cfg);
metrics::EvalConfig eval_config(const RunConfig& cfg);

// ---- files -----------------------------------------------------------------

std::string graph_document(const artgraph::ArticulationGraph& g, const std::string& hash);
std::string urdf_document(const artgraph::ArticulationGraph& g, const std::string& hash);
void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses, const std::string& hash);
std::vector<double> read_loss_csv(const std::filesystem::path& path);

}  // namespace artigen::pipeline
