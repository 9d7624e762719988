// Acceptance run: one PASS/FAIL line per criterion. `--only 1,3` limits the
// run to some criteria.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "artigen/artgraph/ops.hpp"
#include "artigen/checks/suite.hpp"
#include "artigen/error.hpp"
#include "artigen/metrics/distance.hpp"
#include "artigen/metrics/distribution.hpp"
#include "artigen/pipeline/stages.hpp"

namespace fs = std::filesystem;
using namespace artigen;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Verdict {
  int criterion;
  bool passed;
  std::string summary;
};

std::ofstream report_file;

void report_line(const Verdict& v) {
  std::ostringstream line;
  line << "criterion " << v.criterion << " " << (v.passed ? "PASS" : "FAIL") << ": " << v.summary;
  std::cout << line.str() << std::endl;
  report_file << line.str() << std::endl;
}

bool all_passed(const std::vector<checks::CheckResult>& rs) {
  for (const auto& r : rs) {
    std::cout << "  " << checks::format_result(r) << std::endl;
    if (!r.passed) return false;
  }
  return true;
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  const auto rs = checks::gradient_suite(10, 1e-5, 101);
  const double secs = since(t0);
  const bool ok = all_passed(rs) && secs < 60.0;
  return {1, ok, "3 losses x 10 instances, max rel error <= 1e-5, " + fixed(secs, 1) + " s (limit 60 s)"};
}

Verdict criterion2() {
  const auto s = jointdiff::make_schedule();
  const bool ok = all_passed({checks::schedule_identities(s), checks::inversion_at_one(s, 1e-9, 202),
                              checks::q_sample_moments(s, 20000, 203)});
  return {2, ok, "schedule identities exact, t=1 inversion within 1e-9, q_sample moments within 3 SE"};
}

Verdict criterion3() {
  const bool ok = all_passed({checks::hgnn_spectral(20, 1e-9, 303)});
  return {3, ok, "eigenvector and spectral radius within 1e-9 on 20 hypergraphs, identity case exact"};
}

Verdict criterion4() {
  const bool ok = all_passed({checks::mst_oracle(200, 404)});
  return {4, ok, "200 K=4 instances agree with exhaustive enumeration (16 trees each)"};
}

Verdict criterion5() {
  const bool ok = all_passed({checks::metric_oracles(50, 1e-12, 505)});
  return {5, ok, "loop oracles within 1e-12 on 50 matrices, separated 1-NNA = 1.0, duplicate-pool 1-NNA <= 0.55"};
}

Verdict criterion6() {
  const bool ok = all_passed({checks::roundtrips(500, 606)});
  return {6, ok, "graph JSON and matrix round trips bit-exact on 500 synthetic graphs"};
}

// Generated graphs for every held-out cloud; failures are left out of the set.
struct GenerationRun {
  std::vector<artgraph::ArticulationGraph> graphs;
  std::size_t consistent = 0;
  std::size_t failures = 0;
};

GenerationRun generate_for(const std::vector<geometry::Sample>& holdout, const pipeline::Models& models,
                           const pipeline::RunConfig& cfg, std::uint64_t seed) {
  GenerationRun out;
  const numcore::Rng base(seed);
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    auto rng = base.split(i);
    try {
      auto g = pipeline::generate_one(holdout[i].cloud, models, cfg, i, rng).graph;
      const std::size_t expected = holdout[i].graph.edges.size();
      out.consistent += artgraph::validate(g).empty() && g.edges.size() == expected;
      out.graphs.push_back(std::move(g));
    } catch (const pipeline::StageError& e) {
      ++out.failures;
      std::cout << "  generation failure: " << e.what() << std::endl;
    }
  }
  return out;
}

double mmd_against(const std::vector<artgraph::ArticulationGraph>& gen,
                   const std::vector<metrics::Instantiation>& ref, const metrics::IdConfig& id) {
  if (gen.empty()) return INFINITY;
  std::vector<metrics::Instantiation> g;
  for (const auto& x : gen) g.push_back(metrics::instantiate(x, id));
  return metrics::mmd(metrics::distance_matrix(g, ref));
}

Verdict criterion7(const fs::path& work) {
  pipeline::RunConfig cfg;
  cfg.paths.dataset = work / "dataset";
  cfg.paths.checkpoints = work / "checkpoints";
  cfg.paths.output = work / "generated";
  fs::remove_all(work);
  // Training logs every 100 iterations; keep every fifth line.
  std::size_t lines = 0;
  auto log = [&lines](const std::string& line) {
    if (lines++ % 5 == 4) std::cout << "  " << line << std::endl;
  };

  const auto t0 = Clock::now();
  const auto samples = pipeline::synthesize(cfg);
  pipeline::write_dataset(cfg.paths.dataset, samples, cfg);
  auto split = pipeline::split_dataset(pipeline::read_dataset(cfg.paths.dataset), cfg.extract.holdout);
  const double t_synth = since(t0);
  const auto t1 = Clock::now();
  pipeline::train_extract_stage(cfg, split.train, false, log);
  const double t_extract = since(t1);
  const auto t2 = Clock::now();
  pipeline::train_diffuse_stage(cfg, split.train, false, log);
  const double t_diffuse = since(t2);
  const double t_total = since(t0);
  std::cout << "  synth " << fixed(t_synth, 1) << " s, extractor " << fixed(t_extract, 1) << " s, denoiser "
            << fixed(t_diffuse, 1) << " s" << std::endl;

  const auto models = pipeline::load_models(cfg);
  const auto& holdout = split.holdout;

  std::size_t parts_ok = 0;
  for (const auto& s : holdout) {
    const auto v = hypernet::extract_vertices(pipeline::encode_cloud(s.cloud, cfg.extract.fps_points).data(),
                                              models.extractor);
    const auto decoded = artgraph::decode_matrices(v, numcore::Tensor(numcore::Shape{artgraph::kPairCount,
                                                                                     artgraph::kEdgeDim}));
    parts_ok += decoded.part_count() == s.graph.part_count();
  }
  const double part_rate = static_cast<double>(parts_ok) / static_cast<double>(holdout.size());

  const auto t3 = Clock::now();
  const auto first = generate_for(holdout, models, cfg, 7000);
  const double t_gen = since(t3);
  const double tree_rate = static_cast<double>(first.consistent) / static_cast<double>(holdout.size());
  std::cout << "  generated " << holdout.size() << " objects in " << fixed(t_gen, 1) << " s" << std::endl;

  pipeline::Models baseline = models;
  {
    auto rng = pipeline::stage_rng(cfg, pipeline::Stage::kDiffuse);
    baseline.denoiser = jointdiff::init_denoiser(cfg.diffuse.model.net, rng);
  }
  std::vector<artgraph::ArticulationGraph> ref;
  for (const auto& s : holdout) ref.push_back(s.graph);
  double trained_sum = 0.0, untrained_sum = 0.0;
  constexpr int kSeeds = 5;
  for (int k = 0; k < kSeeds; ++k) {
    metrics::IdConfig id = cfg.eval.id;
    id.seed = 9000 + static_cast<std::uint64_t>(k);
    std::vector<metrics::Instantiation> ref_inst;
    for (const auto& g : ref) ref_inst.push_back(metrics::instantiate(g, id));
    const auto gen_seed = 8000 + static_cast<std::uint64_t>(k);
    const double trained = mmd_against(generate_for(holdout, models, cfg, gen_seed).graphs, ref_inst, id);
    const double untrained = mmd_against(generate_for(holdout, baseline, cfg, gen_seed).graphs, ref_inst, id);
    std::cout << "  seed " << k << ": MMD trained " << trained << ", untrained " << untrained << std::endl;
    trained_sum += trained;
    untrained_sum += untrained;
  }
  const double improvement = 1.0 - trained_sum / untrained_sum;

  const bool timing_ok = t_total < 7200.0, parts_pass = part_rate >= 0.9, trees_pass = tree_rate >= 0.8,
             mmd_pass = improvement >= 0.2;
  auto mark = [](bool ok) { return ok ? "ok  " : "FAIL"; };
  std::cout << "  " << mark(timing_ok) << " synth + training " << fixed(t_total / 60.0, 1)
            << " min (limit 120 min), 200 samples, 150/50 split\n"
            << "  " << mark(parts_pass) << " (a) part count correct on " << parts_ok << "/50 held-out ("
            << fixed(100 * part_rate, 1) << "%, limit 90%)\n"
            << "  " << mark(trees_pass) << " (b) " << first.consistent
            << "/50 generated objects are valid trees with the template's edge count (" << fixed(100 * tree_rate, 1)
            << "%, limit 80%)\n"
            << "  " << mark(mmd_pass) << " (c) 5-seed mean MMD " << fixed(trained_sum / kSeeds, 5) << " vs untrained "
            << fixed(untrained_sum / kSeeds, 5) << ": improvement " << fixed(100 * improvement, 1) << "% (limit 20%)"
            << std::endl;
  return {7, timing_ok && parts_pass && trees_pass && mmd_pass,
                 fixed(t_total / 60.0, 1) + " min; parts " + fixed(100 * part_rate, 1) + "%, trees " +
                     fixed(100 * tree_rate, 1) + "%, MMD improvement " + fixed(100 * improvement, 1) + "%"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = s.str();
  }
  return files;
}

Verdict criterion8(const fs::path& cli, const fs::path& work) {
  const std::string args =
      " -q -s synth.count=24 -s extract.holdout=6 -s extract.iterations=40 -s extract.clusters=8"
      " -s extract.hidden=32 -s diffuse.iterations=40 -s diffuse.hidden=32 -s diffuse.sample_steps=20"
      " -s generate.count=4 -s eval.points=128 -s eval.runs=2 --seed 17";
  const std::vector<std::string> commands = {"synth", "train-extract", "train-diffuse", "generate --urdf",
                                             "eval --gen data/generated --holdout"};
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work / ("run" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& c : commands) {
      const std::string line = "cd '" + dir.string() + "' && '" + cli.string() + "'" + args + " " + c + " > /dev/null";
      if (std::system(line.c_str()) != 0) return {8, false, "command failed: " + c};
    }
    runs.push_back(snapshot(dir));
  }
  std::size_t differing = 0;
  std::string first;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) {
      if (differing++ == 0) first = name;
    }
  }
  const bool ok = differing == 0 && runs[0].size() == runs[1].size() && !runs[0].empty();
  return {8, ok, std::to_string(runs[0].size()) + " artifacts from synth, train-extract, train-diffuse, generate, "
                 "eval compared byte for byte: " +
                     (ok ? std::string("identical") : std::to_string(differing) + " differ (first " + first + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-8"};
  fs::path cli, work = fs::current_path() / "acceptance_work", report = fs::current_path() / "acceptance_report.txt";
  std::string only;
  app.add_option("--cli", cli, "Path to the artigen executable")->required();
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Comma-separated criteria to run");
  app.add_option("--report", report, "File receiving the PASS/FAIL lines");
  CLI11_PARSE(app, argc, argv);
  report_file.open(report, std::ios::trunc);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');) selected.insert(std::stoi(tok));
  auto want = [&](int c) { return selected.empty() || selected.count(c) > 0; };

  std::vector<Verdict> verdicts;
  auto run = [&](int c, auto fn) {
    if (!want(c)) return;
    try {
      for (const auto& v : fn()) {
        report_line(v);
        verdicts.push_back(v);
      }
    } catch (const std::exception& e) {
      Verdict v{c, false, std::string("threw: ") + e.what()};
      report_line(v);
      verdicts.push_back(v);
    }
  };
  auto one = [](auto fn) { return [fn] { return std::vector<Verdict>{fn()}; }; };
  run(1, one(criterion1));
  run(2, one(criterion2));
  run(3, one(criterion3));
  run(4, one(criterion4));
  run(5, one(criterion5));
  run(6, one(criterion6));
  run(7, [&] { return std::vector<Verdict>{criterion7(work / "e2e")}; });
  run(8, [&] { return std::vector<Verdict>{criterion8(fs::absolute(cli), work / "determinism")}; });

  std::size_t failed = 0;
  for (const auto& v : verdicts) failed += !v.passed;
  std::cout << (verdicts.size() - failed) << "/" << verdicts.size() << " criteria passed" << std::endl;
  report_file << (verdicts.size() - failed) << "/" << verdicts.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
