#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <sstream>

#include "artigen/artgraph/io.hpp"
#include "artigen/artgraph/ops.hpp"
#include "artigen/error.hpp"
#include "artigen/numcore/binary_io.hpp"
#include "artigen/pipeline/config.hpp"
#include "artigen/pipeline/stages.hpp"

namespace fs = std::filesystem;
using namespace artigen;
using namespace artigen::pipeline;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("artigen_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

RunConfig tiny(const fs::path& root) {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.paths = {root / "dataset", root / "checkpoints", root / "generated"};
  for (const char* s : {"synth.count=16", "synth.cloud_points=256", "extract.holdout=4", "extract.fps_points=128",
                        "extract.iterations=12", "extract.clusters=4", "extract.hidden=16",
                        "extract.checkpoint_every=5", "diffuse.iterations=12", "diffuse.hidden=16",
                        "diffuse.sample_steps=10", "diffuse.checkpoint_every=5", "generate.count=3"}) {
    apply_override(cfg, s);
  }
  return cfg;
}

}  // namespace

TEST(Config, EmptyTextKeepsDefaults) {
  EXPECT_EQ(config_hash(parse_config("")), config_hash(RunConfig{}));
  EXPECT_EQ(parse_config("").paths.dataset, RunConfig{}.paths.dataset);
}

TEST(Config, IniRoundTrip) {
  RunConfig cfg = tiny("/tmp/x");
  apply_override(cfg, "diffuse.sigma=posterior");
  apply_override(cfg, "generate.label=laptop_lid");
  const RunConfig back = parse_config(to_ini(cfg));
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_EQ(to_ini(back), to_ini(cfg));
  EXPECT_EQ(back.paths.output, cfg.paths.output);
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(parse_config("[synth]\ncolor = 3\n"), InvalidArgument);
  EXPECT_THROW(parse_config("[nosuch]\ncount = 3\n"), InvalidArgument);
  EXPECT_THROW(parse_config("[synth]\ncount = many\n"), InvalidArgument);
  RunConfig cfg;
  EXPECT_THROW(apply_override(cfg, "synth.count"), InvalidArgument);
  EXPECT_THROW(apply_override(cfg, "diffuse.sigma=sometimes"), InvalidArgument);
  apply_override(cfg, "generate.label=teapot");
  EXPECT_THROW(require_valid(cfg), InvalidArgument);
}

TEST(Config, HashTracksNumericSettingsOnly) {
  const RunConfig base;
  RunConfig moved = base;
  moved.paths.output = "elsewhere";
  apply_override(moved, "eval.threads=4");
  EXPECT_EQ(config_hash(moved), config_hash(base));
  RunConfig changed = base;
  apply_override(changed, "diffuse.beta_T=0.03");
  EXPECT_NE(config_hash(changed), config_hash(base));
  RunConfig reseeded = base;
  reseeded.seed = 1;
  EXPECT_NE(config_hash(reseeded), config_hash(base));
}

TEST(Config, ValidationCatchesUnrunnableValues) {
  RunConfig cfg;
  cfg.synth.min_parts = 5;
  cfg.synth.max_parts = 3;
  EXPECT_THROW(require_valid(cfg), InvalidArgument);
  cfg = RunConfig{};
  cfg.extract.holdout = cfg.synth.count;
  EXPECT_THROW(require_valid(cfg), InvalidArgument);
  EXPECT_NO_THROW(require_valid(RunConfig{}));
}

TEST(Config, StageStreamsDiffer) {
  const RunConfig cfg;
  auto a = stage_rng(cfg, Stage::kSynth), b = stage_rng(cfg, Stage::kExtract);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(Dataset, DeterministicAndSeedSensitive) {
  const RunConfig cfg = tiny("/tmp/x");
  const auto a = synthesize(cfg), b = synthesize(cfg);
  ASSERT_EQ(a.size(), cfg.synth.count);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].graph, b[i].graph);
    EXPECT_EQ(a[i].cloud.points, b[i].cloud.points);
    EXPECT_GE(a[i].graph.part_count(), cfg.synth.min_parts);
    EXPECT_LE(a[i].graph.part_count(), cfg.synth.max_parts);
  }
  RunConfig other = cfg;
  other.seed = 6;
  EXPECT_NE(synthesize(other)[0].cloud.points, a[0].cloud.points);
}

TEST(Dataset, WriteReadRoundTrip) {
  TempDir tmp("dataset_rt");
  const RunConfig cfg = tiny(tmp.path());
  const auto samples = synthesize(cfg);
  write_dataset(cfg.paths.dataset, samples, cfg);
  const auto back = read_dataset(cfg.paths.dataset);
  ASSERT_EQ(back.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(back[i].graph, samples[i].graph);
    EXPECT_EQ(back[i].cloud.points, samples[i].cloud.points);
    EXPECT_EQ(back[i].label, samples[i].label);
  }
  const auto manifest = nlohmann::json::parse(slurp(cfg.paths.dataset / "manifest.json"));
  EXPECT_EQ(manifest["count"], samples.size());
  EXPECT_EQ(manifest["config_hash"], config_hash(cfg));

  const auto split = split_dataset(back, cfg.extract.holdout);
  EXPECT_EQ(split.train.size(), samples.size() - cfg.extract.holdout);
  EXPECT_EQ(split.holdout.front().graph, samples[samples.size() - cfg.extract.holdout].graph);
}

TEST(Dataset, MissingCloudNamesFile) {
  TempDir tmp("dataset_missing");
  const RunConfig cfg = tiny(tmp.path());
  write_dataset(cfg.paths.dataset, synthesize(cfg), cfg);
  fs::remove(cfg.paths.dataset / "clouds" / "000003.bin");
  try {
    read_dataset(cfg.paths.dataset);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("000003.bin"), std::string::npos);
  }
}

TEST(Files, LossCsvRoundTrip) {
  TempDir tmp("loss_csv");
  const std::vector<double> losses = {1.0, 0.1, 1.0 / 3.0, 2.5e-17};
  const fs::path p = tmp.path() / "loss.csv";
  write_loss_csv(p, losses, "abc");
  EXPECT_EQ(read_loss_csv(p), losses);
  EXPECT_EQ(slurp(p).rfind("# config_hash abc\niteration,loss\n", 0), 0u);
}

TEST(Files, DocumentsCarryHash) {
  numcore::Rng rng(3);
  const auto s = synth_for_label(geometry::Template::kDrawerBox, 2, 4, 64, rng);
  const auto json = nlohmann::json::parse(graph_document(s.graph, "h123"));
  EXPECT_EQ(json["config_hash"], "h123");
  EXPECT_EQ(artgraph::from_json(json), s.graph);
  const auto urdf = urdf_document(s.graph, "h123");
  EXPECT_EQ(urdf.rfind("<?xml", 0), 0u);
  EXPECT_NE(urdf.find("<!-- config_hash h123 -->"), std::string::npos);
}

TEST(Stages, TrainResumeGenerate) {
  TempDir tmp("stages");
  const RunConfig cfg = tiny(tmp.path());
  const auto split = split_dataset(synthesize(cfg), cfg.extract.holdout);

  const auto ext = train_extract_stage(cfg, split.train, false);
  const auto den = train_diffuse_stage(cfg, split.train, false);
  EXPECT_EQ(read_loss_csv(extractor_files(cfg).losses).size(), cfg.extract.model.iterations);
  EXPECT_EQ(read_loss_csv(denoiser_files(cfg).losses).size(), cfg.diffuse.model.iterations);
  EXPECT_EQ(load_extractor(cfg).params, ext.params);
  EXPECT_EQ(load_denoiser(cfg), den);

  // Stop short, then continue to the full count.
  TempDir tmp2("stages_resume");
  RunConfig part = cfg;
  part.paths = {tmp2.path() / "dataset", tmp2.path() / "checkpoints", tmp2.path() / "generated"};
  apply_override(part, "extract.iterations=7");
  apply_override(part, "diffuse.iterations=7");
  train_extract_stage(part, split.train, false);
  train_diffuse_stage(part, split.train, false);
  RunConfig full = cfg;
  full.paths = part.paths;
  EXPECT_EQ(train_extract_stage(full, split.train, true).params, ext.params);
  EXPECT_EQ(train_diffuse_stage(full, split.train, true), den);
  EXPECT_EQ(read_loss_csv(extractor_files(full).losses), read_loss_csv(extractor_files(cfg).losses));
  EXPECT_EQ(read_loss_csv(denoiser_files(full).losses), read_loss_csv(denoiser_files(cfg).losses));

  const auto models = load_models(cfg);
  EXPECT_EQ(models.schedule.steps, cfg.diffuse.model.sample_steps);
  const auto summary = generate_stage(cfg, models, GenerateOptions{true, std::nullopt});
  EXPECT_EQ(summary.written + summary.failures.size(), cfg.generate.count);
  const auto graphs = read_graph_dir(cfg.paths.output);
  EXPECT_EQ(graphs.size(), summary.written);
  for (const auto& g : graphs) EXPECT_TRUE(artgraph::validate(g).empty());
  std::size_t urdfs = 0;
  for (const auto& e : fs::directory_iterator(cfg.paths.output / "urdf")) urdfs += e.path().extension() == ".urdf";
  EXPECT_EQ(urdfs, summary.written);
}

TEST(Stages, ResumeRejectsOtherConfig) {
  TempDir tmp("stages_mismatch");
  const RunConfig cfg = tiny(tmp.path());
  const auto split = split_dataset(synthesize(cfg), cfg.extract.holdout);
  train_extract_stage(cfg, split.train, false);
  RunConfig other = cfg;
  apply_override(other, "extract.lr=0.5");
  EXPECT_THROW(train_extract_stage(other, split.train, true), Error);
}

TEST(Eval, SeedsFollowRootSeed) {
  RunConfig cfg;
  const auto a = eval_seeds(cfg);
  EXPECT_EQ(a.size(), cfg.eval.runs);
  EXPECT_EQ(eval_seeds(cfg), a);
  cfg.seed = 1;
  EXPECT_NE(eval_seeds(cfg), a);
}

// Set ARTIGEN_UPDATE_GOLDEN=1 to rewrite docs/golden.
TEST(Files, GoldenExportsPerTemplate) {
  const fs::path dir = fs::path(ARTIGEN_SOURCE_DIR) / "docs" / "golden";
  const bool update = std::getenv("ARTIGEN_UPDATE_GOLDEN") != nullptr;
  for (std::size_t k = 0; k < geometry::kTemplateCount; ++k) {
    const auto t = static_cast<geometry::Template>(k);
    numcore::Rng rng(100 + k);
    const auto [lo, hi] = geometry::template_part_range(t);
    const auto g = synth_for_label(t, hi, hi, 64, rng).graph;
    const std::string name = geometry::template_name(t);
    const std::string json = artgraph::export_json(g), urdf = artgraph::export_urdf(g);
    if (update) {
      numcore::write_text_file(dir / (name + ".json"), json);
      numcore::write_text_file(dir / (name + ".urdf"), urdf);
    }
    EXPECT_EQ(slurp(dir / (name + ".json")), json) << name;
    EXPECT_EQ(slurp(dir / (name + ".urdf")), urdf) << name;
    EXPECT_EQ(artgraph::from_json(nlohmann::json::parse(json)), g) << name;
  }
}
