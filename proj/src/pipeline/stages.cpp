#include "artigen/pipeline/stages.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "artigen/artgraph/io.hpp"
#include "artigen/artgraph/ops.hpp"
#include "artigen/error.hpp"
#include "artigen/geometry/pattern.hpp"
#include "artigen/numcore/binary_io.hpp"
#include "artigen/numcore/checkpoint.hpp"

namespace artigen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using numcore::Shape;

namespace {

constexpr std::uint64_t kPreFpsSeed = 1024;
constexpr int kManifestVersion = 1;
constexpr std::uint64_t kSampleStream = 1;

std::string index_name(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

// Hash of the settings a checkpoint's trajectory depends on; iteration count
// and checkpoint cadence may change between resumes.
std::string resume_key(const RunConfig& cfg) {
  json j = to_json(cfg);
  j["extract"].erase("iterations");
  j["extract"].erase("checkpoint_every");
  j["diffuse"].erase("iterations");
  j["diffuse"].erase("checkpoint_every");
  j.erase("generate");
  j.erase("eval");
  return numcore::fnv1a_hex(numcore::canonical_dump(j));
}

numcore::TrainState resume_state(const fs::path& path, const std::string& module, const RunConfig& cfg,
                                 std::size_t samples) {
  const auto ckpt = numcore::load_checkpoint(path, module);
  if (ckpt.meta.value("resume_key", "") != resume_key(cfg)) {
    throw InvalidArgument(path.string() + ": checkpoint was trained with different settings");
  }
  if (ckpt.meta.value("samples", std::size_t{0}) != samples) {
    throw InvalidArgument(path.string() + ": checkpoint was trained on a different dataset size");
  }
  return numcore::from_checkpoint(ckpt);
}

void save_state(const fs::path& path, const std::string& module, const numcore::TrainState& state,
                const RunConfig& cfg, std::size_t samples, json extra = json::object()) {
  auto ckpt = numcore::to_checkpoint(state, module);
  ckpt.meta["config_hash"] = config_hash(cfg);
  ckpt.meta["resume_key"] = resume_key(cfg);
  ckpt.meta["samples"] = samples;
  for (auto& [k, v] : extra.items()) ckpt.meta[k] = v;
  numcore::save_checkpoint(path, ckpt, to_json(cfg));
}

std::function<void(const numcore::TrainState&)> progress(const char* what, std::size_t total, std::size_t every,
                                                         const std::function<void()>& save, const Logger& log) {
  return [=](const numcore::TrainState& s) {
    if (every > 0 && s.iteration % every == 0 && s.iteration < total) save();
    if (log && (s.iteration % 100 == 0 || s.iteration == total)) {
      std::ostringstream msg;
      msg << what << " " << s.iteration << "/" << total << " loss " << s.losses.back();
      log(msg.str());
    }
  };
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(numcore::read_text_file(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

geometry::Template template_or_throw(const std::string& label) {
  const auto t = geometry::template_from_name(label);
  if (!t) throw InvalidArgument("unknown label '" + label + "'");
  return *t;
}

}  // namespace

std::vector<geometry::Sample> synthesize(const RunConfig& cfg) {
  require_valid(cfg);
  auto rng = stage_rng(cfg, Stage::kSynth);
  return geometry::synth_mixed(cfg.synth.count, cfg.synth.min_parts, cfg.synth.max_parts, cfg.synth.cloud_points,
                               rng);
}

geometry::Sample synth_for_label(geometry::Template t, std::size_t min_parts, std::size_t max_parts,
                                 std::size_t cloud_points, numcore::Rng& rng) {
  const auto [lo, hi] = geometry::template_part_range(t);
  const std::size_t a = std::max(lo, min_parts), b = std::min(hi, max_parts);
  if (a > b) {
    throw InvalidArgument(std::string(geometry::template_name(t)) + " cannot build " + std::to_string(min_parts) +
                          ".." + std::to_string(max_parts) + " parts");
  }
  geometry::SynthSpec spec;
  spec.shape = t;
  spec.part_count = a + rng.below(b - a + 1);
  spec.cloud_points = cloud_points;
  return std::move(geometry::synth_dataset(spec, 1, rng).front());
}

void write_dataset(const fs::path& dir, const std::vector<geometry::Sample>& samples, const RunConfig& cfg) {
  const std::string hash = config_hash(cfg);
  try {
    fs::create_directories(dir / "graphs");
    fs::create_directories(dir / "clouds");
  } catch (const fs::filesystem_error& e) {
    throw IoError("cannot create dataset directory " + dir.string() + ": " + e.what());
  }
  json entries = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string graph_file = "graphs/" + index_name(i, 6) + ".json";
    const std::string cloud_file = "clouds/" + index_name(i, 6) + ".bin";
    numcore::write_text_file(dir / graph_file, graph_document(samples[i].graph, hash));
    geometry::write_cloud_binary(dir / cloud_file, samples[i].cloud);
    entries.push_back({{"graph_file", graph_file}, {"cloud_file", cloud_file}, {"label", samples[i].label},
                       {"parts", samples[i].graph.part_count()}});
  }
  const json manifest = {{"format", "artigen-dataset"}, {"version", kManifestVersion}, {"config_hash", hash},
                         {"seed", cfg.seed},           {"count", samples.size()},    {"samples", std::move(entries)}};
  numcore::write_text_file(dir / "manifest.json", numcore::canonical_dump(manifest) + "\n");
}

std::vector<geometry::Sample> read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("no dataset manifest at " + manifest_path.string());
  const json manifest = read_json_file(manifest_path);
  if (manifest.value("format", "") != "artigen-dataset") throw IoError(manifest_path.string() + ": not a dataset manifest");
  std::vector<geometry::Sample> out;
  try {
    for (const auto& entry : manifest.at("samples")) {
      const fs::path graph_path = dir / entry.at("graph_file").get<std::string>();
      const fs::path cloud_path = dir / entry.at("cloud_file").get<std::string>();
      geometry::Sample s;
      try {
        s.graph = artgraph::import_json(numcore::read_text_file(graph_path));
      } catch (const ValidationError& e) {
        throw IoError(graph_path.string() + ": " + e.what());
      }
      s.cloud = geometry::read_cloud(cloud_path);
      s.label = entry.at("label").get<std::string>();
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  if (out.empty()) throw IoError(manifest_path.string() + ": dataset is empty");
  return out;
}

Split split_dataset(std::vector<geometry::Sample> samples, std::size_t holdout) {
  if (holdout >= samples.size()) {
    throw InvalidArgument("holdout of " + std::to_string(holdout) + " leaves no training samples out of " +
                          std::to_string(samples.size()));
  }
  Split s;
  const auto cut = samples.end() - static_cast<std::ptrdiff_t>(holdout);
  s.train.assign(std::make_move_iterator(samples.begin()), std::make_move_iterator(cut));
  s.holdout.assign(std::make_move_iterator(cut), std::make_move_iterator(samples.end()));
  return s;
}

Tensor encode_cloud(const geometry::PointCloud& pc, std::size_t fps_points) {
  if (pc.size() <= fps_points) return geometry::pattern_encode(pc);
  numcore::Rng rng(kPreFpsSeed);
  return geometry::pattern_encode(pc.subset(geometry::fps(pc, fps_points, rng)));
}

std::vector<Tensor> extractor_vectors(const std::vector<geometry::Sample>& samples, std::size_t fps_points) {
  std::vector<Tensor> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode_cloud(s.cloud, fps_points));
  return out;
}

std::vector<jointdiff::DiffusionExample> diffusion_examples(const std::vector<geometry::Sample>& samples) {
  std::vector<jointdiff::DiffusionExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    auto e = artgraph::encode_graph(s.graph);
    out.push_back({std::move(e.vertices), std::move(e.edges)});
  }
  return out;
}

CheckpointFiles extractor_files(const RunConfig& cfg) {
  const fs::path d = cfg.paths.checkpoints;
  return {d / "extractor.ckpt", d / "extractor_loss.csv", d / "extractor_graph.bin"};
}

CheckpointFiles denoiser_files(const RunConfig& cfg) {
  const fs::path d = cfg.paths.checkpoints;
  return {d / "denoiser.ckpt", d / "denoiser_loss.csv", {}};
}

hypernet::ExtractorModel train_extract_stage(const RunConfig& cfg, const std::vector<geometry::Sample>& train,
                                             bool resume, const Logger& log) {
  require_valid(cfg);
  if (train.empty()) throw InvalidArgument("train-extract: no training samples");
  const auto& mc = cfg.extract.model;
  const auto vecs = extractor_vectors(train, cfg.extract.fps_points);
  const std::size_t n = vecs.size(), d = vecs.front().size();
  Tensor vectors(Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(vecs[i].data().begin(), vecs[i].data().end(),
              vectors.data().begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  std::vector<Tensor> targets;
  for (const auto& s : train) targets.push_back(artgraph::encode_graph(s.graph).vertices);

  const auto files = extractor_files(cfg);
  fs::create_directories(cfg.paths.checkpoints);
  hypernet::ExtractorModel model;
  numcore::TrainState state;
  if (resume && fs::exists(files.checkpoint)) {
    state = resume_state(files.checkpoint, "extractor", cfg, n);
    model.context = hypernet::load_hypergraph(files.hypergraph);
    if (model.context.vectors.rows() != n) throw IoError(files.hypergraph.string() + ": does not match the dataset");
    if (log) log("train-extract: resuming at iteration " + std::to_string(state.iteration));
  } else {
    auto rng = stage_rng(cfg, Stage::kExtract);
    model.context = hypernet::prepare_context(vectors, mc, rng);
    state.params = hypernet::init_extractor_params(d, targets, mc, rng);
    state.rng = rng.split(1);
    hypernet::save_hypergraph(files.hypergraph, model.context);
  }
  const std::string hash = config_hash(cfg);
  auto save = [&] {
    save_state(files.checkpoint, "extractor", state, cfg, n, {{"hypergraph_file", files.hypergraph.filename().string()}});
    write_loss_csv(files.losses, state.losses, hash);
  };
  hypernet::run_extractor(model.context, targets, mc, state,
                          progress("train-extract", mc.iterations, cfg.extract.checkpoint_every, save, log));
  save();
  model.params = std::move(state.params);
  return model;
}

numcore::ParamSet train_diffuse_stage(const RunConfig& cfg, const std::vector<geometry::Sample>& train, bool resume,
                                      const Logger& log) {
  require_valid(cfg);
  if (train.empty()) throw InvalidArgument("train-diffuse: no training samples");
  const auto& mc = cfg.diffuse.model;
  const auto data = diffusion_examples(train);
  const auto files = denoiser_files(cfg);
  fs::create_directories(cfg.paths.checkpoints);
  numcore::TrainState state;
  if (resume && fs::exists(files.checkpoint)) {
    state = resume_state(files.checkpoint, "denoiser", cfg, data.size());
    if (log) log("train-diffuse: resuming at iteration " + std::to_string(state.iteration));
  } else {
    auto rng = stage_rng(cfg, Stage::kDiffuse);
    state.params = jointdiff::init_denoiser(mc.net, rng);
    state.rng = rng.split(1);
  }
  const std::string hash = config_hash(cfg);
  auto save = [&] {
    save_state(files.checkpoint, "denoiser", state, cfg, data.size());
    write_loss_csv(files.losses, state.losses, hash);
  };
  jointdiff::run_denoiser(data, mc, state,
                          progress("train-diffuse", mc.iterations, cfg.diffuse.checkpoint_every, save, log));
  save();
  return std::move(state.params);
}

hypernet::ExtractorModel load_extractor(const RunConfig& cfg) {
  const auto files = extractor_files(cfg);
  if (!fs::exists(files.checkpoint)) throw InvalidArgument("no extractor checkpoint at " + files.checkpoint.string());
  hypernet::ExtractorModel model;
  model.params = numcore::load_checkpoint(files.checkpoint, "extractor").params;
  model.context = hypernet::load_hypergraph(files.hypergraph);
  return model;
}

numcore::ParamSet load_denoiser(const RunConfig& cfg) {
  const auto files = denoiser_files(cfg);
  if (!fs::exists(files.checkpoint)) throw InvalidArgument("no denoiser checkpoint at " + files.checkpoint.string());
  return numcore::load_checkpoint(files.checkpoint, "denoiser").params;
}

jointdiff::NoiseSchedule sampling_schedule(const RunConfig& cfg) {
  const auto& mc = cfg.diffuse.model;
  const auto base = jointdiff::make_schedule(mc.T, mc.beta_1, mc.beta_T, mc.sigma);
  return mc.sample_steps == mc.T ? base : jointdiff::respace(base, mc.sample_steps);
}

Models load_models(const RunConfig& cfg) { return {load_extractor(cfg), load_denoiser(cfg), sampling_schedule(cfg)}; }

Generated generate_one(const geometry::PointCloud& cloud, const Models& models, const RunConfig& cfg,
                       std::size_t index, numcore::Rng& rng) {
  std::string stage;
  try {
    Generated out;
    stage = "encode";
    geometry::require_valid(cloud);
    const Tensor query = encode_cloud(cloud, cfg.extract.fps_points);
    stage = "extract";
    out.vertices = hypernet::extract_vertices(query.data(), models.extractor);
    stage = "sample";
    out.edges = jointdiff::sample_edges(out.vertices, models.denoiser, models.schedule, rng).edges;
    stage = "decode";
    out.graph = artgraph::extract_tree(out.vertices, out.edges);
    out.graph.label = cfg.generate.label;
    stage = "validate";
    const auto problems = artgraph::validate(out.graph);
    if (!problems.empty()) throw ValidationError(problems.front());
    return out;
  } catch (const NumericalError& e) {
    throw StageError(stage, index, e.what(), true);
  } catch (const Error& e) {
    throw StageError(stage, index, e.what(), false);
  }
}

GenerateSummary generate_stage(const RunConfig& cfg, const Models& models, const GenerateOptions& opts,
                               const Logger& log) {
  require_valid(cfg);
  const auto t = template_or_throw(cfg.generate.label);
  std::optional<geometry::PointCloud> ingested;
  if (opts.cloud) {
    ingested = geometry::read_cloud(*opts.cloud);
    geometry::require_valid(*ingested);
  }
  const fs::path out = cfg.paths.output;
  fs::remove_all(out / "graphs");
  fs::remove_all(out / "urdf");
  fs::create_directories(out / "graphs");
  if (opts.urdf) fs::create_directories(out / "urdf");

  const std::string hash = config_hash(cfg);
  const auto base = stage_rng(cfg, Stage::kGenerate);
  GenerateSummary summary;
  json samples = json::array(), failures = json::array();
  for (std::size_t i = 0; i < cfg.generate.count; ++i) {
    auto rng = base.split(i);
    const geometry::PointCloud cloud =
        ingested ? *ingested
                 : synth_for_label(t, cfg.synth.min_parts, cfg.synth.max_parts, cfg.synth.cloud_points, rng).cloud;
    auto sample_rng = rng.split(kSampleStream);
    try {
      const auto g = generate_one(cloud, models, cfg, i, sample_rng);
      const std::string stem = cfg.generate.label + "_" + index_name(i, 3);
      json entry = {{"index", i}, {"graph_file", "graphs/" + stem + ".json"}, {"parts", g.graph.part_count()},
                    {"joints", g.graph.edges.size()}};
      numcore::write_text_file(out / "graphs" / (stem + ".json"), graph_document(g.graph, hash));
      if (opts.urdf) {
        numcore::write_text_file(out / "urdf" / (stem + ".urdf"), urdf_document(g.graph, hash));
        entry["urdf_file"] = "urdf/" + stem + ".urdf";
      }
      samples.push_back(std::move(entry));
      ++summary.written;
    } catch (const StageError& e) {
      failures.push_back({{"index", i}, {"stage", e.stage()}, {"message", e.what()}});
      summary.failures.push_back(e.what());
      summary.numerical_failure = summary.numerical_failure || e.numerical();
      if (log) log(std::string("generate: ") + e.what());
    }
  }
  const json manifest = {{"format", "artigen-generation"}, {"version", kManifestVersion},
                         {"config_hash", hash},            {"label", cfg.generate.label},
                         {"count", cfg.generate.count},    {"samples", std::move(samples)},
                         {"failures", std::move(failures)}};
  numcore::write_text_file(out / "generation.json", numcore::canonical_dump(manifest) + "\n");
  return summary;
}

std::vector<artgraph::ArticulationGraph> read_graph_dir(const fs::path& dir) {
  fs::path root = dir;
  if (fs::is_directory(dir / "graphs")) root = dir / "graphs";
  if (!fs::is_directory(root)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<artgraph::ArticulationGraph> out;
  for (const auto& f : files) {
    const json doc = read_json_file(f);
    if (!doc.is_object() || doc.value("format", "") != "artigen-graph") continue;
    try {
      auto g = artgraph::from_json(doc);
      artgraph::require_valid(g, "read_graph_dir");
      out.push_back(std::move(g));
    } catch (const ValidationError& e) {
      throw IoError(f.string() + ": " + e.what());
    } catch (const json::exception& e) {
      throw IoError(f.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError("no graph documents in " + root.string());
  return out;
}

std::vector<std::uint64_t> eval_seeds(const RunConfig& cfg) {
  const auto base = stage_rng(cfg, Stage::kEval);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.eval.runs; ++i) seeds.push_back(base.split(i).next_u64());
  return seeds;
}

metrics::EvalConfig eval_config(const RunConfig& cfg) {
  metrics::EvalConfig e;
  e.id = cfg.eval.id;
  e.seeds = eval_seeds(cfg);
  e.threads = cfg.eval.threads;
  return e;
}

std::string graph_document(const artgraph::ArticulationGraph& g, const std::string& hash) {
  artgraph::require_valid(g, "graph_document");
  json j = artgraph::to_json(g);
  j["config_hash"] = hash;
  return numcore::canonical_dump(j) + "\n";
}

std::string urdf_document(const artgraph::ArticulationGraph& g, const std::string& hash) {
  std::string urdf = artgraph::export_urdf(g);
  const std::string note = "<!-- config_hash " + hash + " -->\n";
  std::size_t at = 0;
  if (urdf.rfind("<?xml", 0) == 0) at = urdf.find('\n') + 1;
  urdf.insert(at, note);
  return urdf;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses, const std::string& hash) {
  std::string text = "# config_hash " + hash + "\niteration,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, losses[i]);
    text += std::to_string(i + 1) + "," + std::string(buf, end) + "\n";
  }
  numcore::write_text_file(path, text);
}

std::vector<double> read_loss_csv(const fs::path& path) {
  std::istringstream in(numcore::read_text_file(path));
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#' || line.rfind("iteration", 0) == 0) continue;
    const auto comma = line.find(',');
    double v = 0.0;
    const char* first = line.data() + comma + 1;
    auto [ptr, ec] = std::from_chars(first, line.data() + line.size(), v);
    if (comma == std::string::npos || ec != std::errc{}) throw IoError(path.string() + ": bad row '" + line + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace artigen::pipeline
