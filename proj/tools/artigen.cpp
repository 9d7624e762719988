#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "artigen/artgraph/io.hpp"
#include "artigen/artgraph/ops.hpp"
#include "artigen/checks/suite.hpp"
#include "artigen/error.hpp"
#include "artigen/metrics/report.hpp"
#include "artigen/numcore/binary_io.hpp"
#include "artigen/pipeline/config.hpp"
#include "artigen/pipeline/stages.hpp"

namespace fs = std::filesystem;
using namespace artigen;

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kNumericalError = 2;

struct Globals {
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

pipeline::RunConfig resolve(const Globals& g) {
  pipeline::RunConfig cfg = g.config ? pipeline::load_config(*g.config) : pipeline::RunConfig{};
  for (const auto& o : g.overrides) pipeline::apply_override(cfg, o);
  if (g.seed) cfg.seed = *g.seed;
  pipeline::require_valid(cfg);
  return cfg;
}

pipeline::Logger stderr_logger(const Globals& g) {
  if (g.quiet) return {};
  return [](const std::string& line) { std::cerr << line << "\n"; };
}

int cmd_synth(const Globals& g) {
  const auto cfg = resolve(g);
  const auto samples = pipeline::synthesize(cfg);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto problems = artgraph::validate(samples[i].graph);
    if (!problems.empty()) throw NumericalError("synth: sample " + std::to_string(i) + ": " + problems.front());
  }
  pipeline::write_dataset(cfg.paths.dataset, samples, cfg);
  std::cout << "wrote " << samples.size() << " samples to " << cfg.paths.dataset.string() << " (config "
            << pipeline::config_hash(cfg) << ")\n";
  return kOk;
}

int cmd_train_extract(const Globals& g, bool resume) {
  const auto cfg = resolve(g);
  auto split = pipeline::split_dataset(pipeline::read_dataset(cfg.paths.dataset), cfg.extract.holdout);
  pipeline::train_extract_stage(cfg, split.train, resume, stderr_logger(g));
  std::cout << "extractor checkpoint " << pipeline::extractor_files(cfg).checkpoint.string() << "\n";
  return kOk;
}

int cmd_train_diffuse(const Globals& g, bool resume) {
  const auto cfg = resolve(g);
  auto split = pipeline::split_dataset(pipeline::read_dataset(cfg.paths.dataset), cfg.extract.holdout);
  pipeline::train_diffuse_stage(cfg, split.train, resume, stderr_logger(g));
  std::cout << "denoiser checkpoint " << pipeline::denoiser_files(cfg).checkpoint.string() << "\n";
  return kOk;
}

int cmd_generate(const Globals& g, const pipeline::GenerateOptions& opts) {
  const auto cfg = resolve(g);
  const auto models = pipeline::load_models(cfg);
  const auto summary = pipeline::generate_stage(cfg, models, opts, stderr_logger(g));
  std::cout << "generated " << summary.written << "/" << cfg.generate.count << " " << cfg.generate.label
            << " objects in " << cfg.paths.output.string() << "\n";
  for (const auto& f : summary.failures) std::cerr << "failed: " << f << "\n";
  if (summary.failures.empty()) return kOk;
  return summary.numerical_failure ? kNumericalError : kUserError;
}

int cmd_eval(const Globals& g, const fs::path& gen_dir, const std::optional<fs::path>& ref_dir, bool holdout,
             const std::optional<fs::path>& out_path) {
  const auto cfg = resolve(g);
  const auto gen = pipeline::read_graph_dir(gen_dir);
  std::vector<artgraph::ArticulationGraph> ref;
  if (ref_dir) {
    ref = pipeline::read_graph_dir(*ref_dir);
  } else {
    auto samples = pipeline::read_dataset(cfg.paths.dataset);
    if (holdout) samples = pipeline::split_dataset(std::move(samples), cfg.extract.holdout).holdout;
    for (auto& s : samples) ref.push_back(std::move(s.graph));
  }
  const fs::path report_path = out_path ? *out_path : gen_dir / "eval_report.json";
  const auto report =
      metrics::eval_report(gen, ref, pipeline::eval_config(cfg), report_path.parent_path() / "matrices");
  auto j = metrics::to_json(report);
  j["config_hash"] = pipeline::config_hash(cfg);
  j["run_config"] = pipeline::to_json(cfg);
  numcore::write_text_file(report_path, numcore::canonical_dump(j) + "\n");
  std::cout << metrics::format_table({{"artigen", report}});
  std::cout << "seeds:";
  for (auto s : report.config.seeds) std::cout << " " << s;
  std::cout << "\nreport " << report_path.string() << "\n";
  return kOk;
}

int cmd_export(const fs::path& graph, const std::optional<fs::path>& json_out, const std::optional<fs::path>& urdf_out,
               const std::optional<fs::path>& matrices_out) {
  const auto g = artgraph::import_json(numcore::read_text_file(graph));
  if (!json_out && !urdf_out && !matrices_out) throw InvalidArgument("export: choose --json, --urdf or --matrices");
  if (json_out) numcore::write_text_file(*json_out, artgraph::export_json(g));
  if (urdf_out) numcore::write_text_file(*urdf_out, artgraph::export_urdf(g));
  if (matrices_out) {
    const auto enc = artgraph::encode_graph(g);
    auto rows = [](const numcore::Tensor& t) {
      nlohmann::json out = nlohmann::json::array();
      for (std::size_t r = 0; r < t.rows(); ++r) {
        std::vector<double> row(t.data().begin() + static_cast<std::ptrdiff_t>(r * t.cols()),
                                t.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols()));
        out.push_back(row);
      }
      return out;
    };
    const nlohmann::json doc = {{"format", "artigen-matrices"}, {"version", 1}, {"vertices", rows(enc.vertices)},
                                {"edges", rows(enc.edges)}};
    numcore::write_text_file(*matrices_out, numcore::canonical_dump(doc) + "\n");
  }
  return kOk;
}

int cmd_selfcheck(bool tamper) {
  checks::SelfcheckOptions opts;
  opts.tamper_schedule = tamper;
  std::size_t failed = 0;
  const auto results = checks::run_selfcheck(opts, [&](const checks::CheckResult& r) {
    std::cout << checks::format_result(r) << std::endl;
    failed += !r.passed;
  });
  std::cout << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kOk : kNumericalError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulated-object generation: synthesis, training, generation and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config, "INI config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", g.overrides, "Override a setting, section.key=value (repeatable)");
  app.add_option("--seed", g.seed, "Root seed (overrides run.seed)");
  app.add_flag("-q,--quiet", g.quiet, "No progress output");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  std::optional<std::size_t> synth_count;
  synth->add_option("--count", synth_count, "Number of samples (synth.count)");

  bool resume = false;
  auto* tx = app.add_subcommand("train-extract", "Train the vertex extractor");
  tx->add_flag("--resume", resume, "Continue from the checkpoint on disk");
  auto* td = app.add_subcommand("train-diffuse", "Train the edge denoiser");
  td->add_flag("--resume", resume, "Continue from the checkpoint on disk");

  auto* gen = app.add_subcommand("generate", "Generate objects for a label");
  pipeline::GenerateOptions gen_opts;
  std::optional<std::string> label;
  std::optional<std::size_t> gen_count;
  std::optional<fs::path> gen_out;
  gen->add_option("--label", label, "Template label (generate.label)");
  gen->add_option("--count", gen_count, "Number of objects (generate.count)");
  gen->add_option("--out", gen_out, "Output directory (paths.output)");
  gen->add_flag("--urdf", gen_opts.urdf, "Also write one URDF per object");
  gen->add_option("--cloud", gen_opts.cloud, "Use this point cloud instead of synthesizing one")
      ->check(CLI::ExistingFile);

  auto* ev = app.add_subcommand("eval", "COV, MMD and 1-NNA of generated graphs against a reference set");
  fs::path eval_gen;
  std::optional<fs::path> eval_ref, eval_out;
  bool eval_holdout = false;
  ev->add_option("--gen", eval_gen, "Directory of generated graph documents")->required();
  ev->add_option("--ref", eval_ref, "Directory of reference graph documents (default: the dataset)");
  ev->add_flag("--holdout", eval_holdout, "Use only the dataset's held-out samples as reference");
  ev->add_option("--out", eval_out, "Report path (default: <gen>/eval_report.json)");

  auto* ex = app.add_subcommand("export", "Re-export a graph document");
  fs::path ex_graph;
  std::optional<fs::path> ex_json, ex_urdf, ex_matrices;
  ex->add_option("graph", ex_graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  ex->add_option("--json", ex_json, "Canonical graph JSON output");
  ex->add_option("--urdf", ex_urdf, "URDF output");
  ex->add_option("--matrices", ex_matrices, "Vertex and edge matrices as JSON");

  auto* sc = app.add_subcommand("selfcheck", "Run the built-in numerical checks");
  bool tamper = false;
  sc->add_flag("--tamper-schedule", tamper, "Lower alpha_bar[1] by 1e-3 first; the inversion check must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUserError;
  }

  try {
    if (synth_count) g.overrides.push_back("synth.count=" + std::to_string(*synth_count));
    if (label) g.overrides.push_back("generate.label=" + *label);
    if (gen_count) g.overrides.push_back("generate.count=" + std::to_string(*gen_count));
    if (gen_out) g.overrides.push_back("paths.output=" + gen_out->string());

    if (*synth) return cmd_synth(g);
    if (*tx) return cmd_train_extract(g, resume);
    if (*td) return cmd_train_diffuse(g, resume);
    if (*gen) return cmd_generate(g, gen_opts);
    if (*ev) return cmd_eval(g, eval_gen, eval_ref, eval_holdout, eval_out);
    if (*ex) return cmd_export(ex_graph, ex_json, ex_urdf, ex_matrices);
    if (*sc) return cmd_selfcheck(tamper);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.numerical() ? kNumericalError : kUserError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  }
  return kUserError;
}
