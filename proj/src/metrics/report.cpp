#include "artigen/metrics/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "artigen/error.hpp"
#include "artigen/metrics/distribution.hpp"

namespace artigen::metrics {

namespace {

std::vector<Instantiation> instantiate_all(const std::vector<ArticulationGraph>& graphs, const IdConfig& id,
                                           const char* side) {
  std::vector<Instantiation> out;
  out.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    try {
      out.push_back(instantiate(graphs[i], id));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(side) + " graph " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::json values_json(const MetricValues& v) {
  return {{"cov", v.cov}, {"mmd", v.mmd}, {"one_nna", v.one_nna}};
}

std::string cell(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f±%.4f", mean, std);
  return buf;
}

}  // namespace

void summarize(EvalReport& report) {
  const std::size_t n = report.runs.size();
  report.mean = {};
  report.std = {};
  if (n == 0) return;
  auto stats = [&](double MetricValues::*field, double& mean, double& std) {
    double s = 0.0;
    for (const auto& r : report.runs) s += r.values.*field;
    mean = s / static_cast<double>(n);
    if (n < 2) return;
    double v = 0.0;
    for (const auto& r : report.runs) v += (r.values.*field - mean) * (r.values.*field - mean);
    std = std::sqrt(v / static_cast<double>(n - 1));
  };
  stats(&MetricValues::cov, report.mean.cov, report.std.cov);
  stats(&MetricValues::mmd, report.mean.mmd, report.std.mmd);
  stats(&MetricValues::one_nna, report.mean.one_nna, report.std.one_nna);
}

EvalReport eval_report(const std::vector<ArticulationGraph>& gen, const std::vector<ArticulationGraph>& ref,
                       const EvalConfig& cfg, const std::optional<std::filesystem::path>& matrix_dir) {
  if (gen.empty() || ref.empty()) throw InvalidArgument("eval_report: generated and reference sets must be non-empty");
  if (cfg.seeds.empty()) throw InvalidArgument("eval_report: no seeds");
  require_valid(cfg.id);
  if (matrix_dir) std::filesystem::create_directories(*matrix_dir);

  EvalReport report;
  report.config = cfg;
  report.generated = gen.size();
  report.reference = ref.size();
  for (std::uint64_t seed : cfg.seeds) {
    IdConfig id = cfg.id;
    id.seed = seed;
    const auto g = instantiate_all(gen, id, "generated");
    const auto r = instantiate_all(ref, id, "reference");
    const Tensor gr = distance_matrix(g, r, cfg.threads);
    const Tensor u = union_matrix(self_distance_matrix(g, cfg.threads), gr, self_distance_matrix(r, cfg.threads));

    SeedResult run;
    run.seed = seed;
    run.values.mmd = mmd(gr);
    run.values.cov = cov(gr);
    run.values.one_nna = one_nna(u, gen.size());
    if (matrix_dir) {
      const auto path = *matrix_dir / ("distances_seed" + std::to_string(seed) + ".bin");
      save_distance_matrix(path, u, {gen.size(), id});
      run.matrix_path = path.string();
    }
    report.runs.push_back(std::move(run));
  }
  summarize(report);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    auto j = values_json(r.values);
    j["seed"] = r.seed;
    if (!r.matrix_path.empty()) j["matrix"] = r.matrix_path;
    runs.push_back(std::move(j));
  }
  return {{"format", "artigen-eval"},
          {"version", 1},
          {"config", {{"poses", report.config.id.poses}, {"points", report.config.id.points}}},
          {"seeds", report.config.seeds},
          {"generated", report.generated},
          {"reference", report.reference},
          {"runs", std::move(runs)},
          {"mean", values_json(report.mean)},
          {"std", values_json(report.std)}};
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t width = 5;
  for (const auto& [label, _] : rows) width = std::max(width, label.size());
  auto pad = [](std::string s, std::size_t w) {
    // Direction arrows are three bytes but one column wide.
    std::size_t cols = 0;
    for (unsigned char ch : s) cols += (ch & 0xC0) != 0x80;
    if (cols < w) s.append(w - cols, ' ');
    return s;
  };
  constexpr std::size_t kCell = 15;
  std::ostringstream out;
  out << pad("Model", width) << "  " << pad("COV↑", kCell) << "  " << pad("MMD↓", kCell) << "  " << "1-NNA↓" << "\n";
  for (const auto& [label, r] : rows) {
    out << pad(label, width) << "  " << pad(cell(r.mean.cov, r.std.cov), kCell) << "  "
        << pad(cell(r.mean.mmd, r.std.mmd), kCell) << "  " << cell(r.mean.one_nna, r.std.one_nna) << "\n";
  }
  return out.str();
}

}  // namespace artigen::metrics
