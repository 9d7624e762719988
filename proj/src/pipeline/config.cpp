#include "artigen/pipeline/config.hpp"

#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "artigen/error.hpp"
#include "artigen/geometry/pattern.hpp"
#include "artigen/geometry/synth.hpp"
#include "artigen/numcore/binary_io.hpp"

namespace artigen::pipeline {

namespace {

namespace pt = boost::property_tree;

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw InvalidArgument("config " + key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(out);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw InvalidArgument("config " + key + ": expected a number, got '" + v + "'");
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool numeric_output = true;  // false for paths
};

using FieldMap = std::map<std::string, Field>;

const FieldMap& fields() {
  static const FieldMap map = [] {
    FieldMap m;
    auto sz = [&m](const std::string& key, auto access) {
      m[key] = {[access, key](RunConfig& c, const std::string& v) { access(c) = parse_size(key, v); },
                [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
    };
    auto dbl = [&m](const std::string& key, auto access) {
      m[key] = {[access, key](RunConfig& c, const std::string& v) { access(c) = parse_double(key, v); },
                [access](const RunConfig& c) { return format_double(access(const_cast<RunConfig&>(c))); }};
    };
    auto path = [&m](const std::string& key, auto access) {
      m[key] = {[access](RunConfig& c, const std::string& v) { access(c) = v; },
                [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)).string(); }, false};
    };
    m["run.seed"] = {[](RunConfig& c, const std::string& v) { c.seed = parse_size("run.seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
    path("paths.dataset", [](RunConfig& c) -> auto& { return c.paths.dataset; });
    path("paths.checkpoints", [](RunConfig& c) -> auto& { return c.paths.checkpoints; });
    path("paths.output", [](RunConfig& c) -> auto& { return c.paths.output; });

    sz("synth.count", [](RunConfig& c) -> auto& { return c.synth.count; });
    sz("synth.min_parts", [](RunConfig& c) -> auto& { return c.synth.min_parts; });
    sz("synth.max_parts", [](RunConfig& c) -> auto& { return c.synth.max_parts; });
    sz("synth.cloud_points", [](RunConfig& c) -> auto& { return c.synth.cloud_points; });

    sz("extract.clusters", [](RunConfig& c) -> auto& { return c.extract.model.clusters; });
    sz("extract.knn", [](RunConfig& c) -> auto& { return c.extract.model.knn; });
    sz("extract.hidden", [](RunConfig& c) -> auto& { return c.extract.model.hidden; });
    sz("extract.iterations", [](RunConfig& c) -> auto& { return c.extract.model.iterations; });
    sz("extract.batch", [](RunConfig& c) -> auto& { return c.extract.model.batch; });
    dbl("extract.lr", [](RunConfig& c) -> auto& { return c.extract.model.lr; });
    sz("extract.lr_period", [](RunConfig& c) -> auto& { return c.extract.model.lr_period; });
    dbl("extract.lr_gamma", [](RunConfig& c) -> auto& { return c.extract.model.lr_gamma; });
    dbl("extract.lambda_matrix", [](RunConfig& c) -> auto& { return c.extract.model.weights.matrix; });
    dbl("extract.lambda_bbox", [](RunConfig& c) -> auto& { return c.extract.model.weights.bbox; });
    dbl("extract.lambda_exist", [](RunConfig& c) -> auto& { return c.extract.model.weights.exist; });
    sz("extract.kmeans_iters", [](RunConfig& c) -> auto& { return c.extract.model.kmeans_iters; });
    sz("extract.fps_points", [](RunConfig& c) -> auto& { return c.extract.fps_points; });
    sz("extract.holdout", [](RunConfig& c) -> auto& { return c.extract.holdout; });
    sz("extract.checkpoint_every", [](RunConfig& c) -> auto& { return c.extract.checkpoint_every; });

    sz("diffuse.T", [](RunConfig& c) -> auto& { return c.diffuse.model.T; });
    dbl("diffuse.beta_1", [](RunConfig& c) -> auto& { return c.diffuse.model.beta_1; });
    dbl("diffuse.beta_T", [](RunConfig& c) -> auto& { return c.diffuse.model.beta_T; });
    m["diffuse.sigma"] = {[](RunConfig& c, const std::string& v) {
                            if (v == "beta") c.diffuse.model.sigma = jointdiff::SigmaRule::kBeta;
                            else if (v == "posterior") c.diffuse.model.sigma = jointdiff::SigmaRule::kPosterior;
                            else throw InvalidArgument("config diffuse.sigma: expected beta or posterior, got '" + v + "'");
                          },
                          [](const RunConfig& c) {
                            return std::string(c.diffuse.model.sigma == jointdiff::SigmaRule::kBeta ? "beta"
                                                                                                   : "posterior");
                          }};
    sz("diffuse.hidden", [](RunConfig& c) -> auto& { return c.diffuse.model.net.hidden; });
    sz("diffuse.sample_steps", [](RunConfig& c) -> auto& { return c.diffuse.model.sample_steps; });
    sz("diffuse.iterations", [](RunConfig& c) -> auto& { return c.diffuse.model.iterations; });
    sz("diffuse.batch", [](RunConfig& c) -> auto& { return c.diffuse.model.batch; });
    dbl("diffuse.lr", [](RunConfig& c) -> auto& { return c.diffuse.model.lr; });
    sz("diffuse.lr_period", [](RunConfig& c) -> auto& { return c.diffuse.model.lr_period; });
    dbl("diffuse.lr_gamma", [](RunConfig& c) -> auto& { return c.diffuse.model.lr_gamma; });
    sz("diffuse.checkpoint_every", [](RunConfig& c) -> auto& { return c.diffuse.checkpoint_every; });

    sz("generate.count", [](RunConfig& c) -> auto& { return c.generate.count; });
    m["generate.label"] = {[](RunConfig& c, const std::string& v) { c.generate.label = v; },
                           [](const RunConfig& c) { return c.generate.label; }};

    sz("eval.poses", [](RunConfig& c) -> auto& { return c.eval.id.poses; });
    sz("eval.points", [](RunConfig& c) -> auto& { return c.eval.id.points; });
    sz("eval.runs", [](RunConfig& c) -> auto& { return c.eval.runs; });
    m["eval.threads"] = {[](RunConfig& c, const std::string& v) { c.eval.threads = parse_size("eval.threads", v); },
                         [](const RunConfig& c) { return std::to_string(c.eval.threads); }, false};
    return m;
  }();
  return map;
}

void set_field(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw InvalidArgument("config: unknown key '" + key + "'");
  it->second.set(cfg, value);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidArgument("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) set_field(cfg, section + "." + key, value.get_value<std::string>());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InvalidArgument("config file not found: " + path.string());
  return parse_config(numcore::read_text_file(path));
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("override '" + assignment + "' is not of the form section.key=value");
  }
  set_field(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void require_valid(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw InvalidArgument("config: " + msg); };
  if (cfg.synth.count == 0) fail("synth.count must be positive");
  if (cfg.synth.min_parts < 2 || cfg.synth.min_parts > cfg.synth.max_parts || cfg.synth.max_parts > artgraph::kMaxParts) {
    fail("need 2 <= synth.min_parts <= synth.max_parts <= " + std::to_string(artgraph::kMaxParts));
  }
  if (cfg.synth.cloud_points < cfg.extract.fps_points) fail("synth.cloud_points is below extract.fps_points");
  if (cfg.extract.fps_points < geometry::kPatternPoints) {
    fail("extract.fps_points must be at least " + std::to_string(geometry::kPatternPoints));
  }
  if (cfg.extract.holdout >= cfg.synth.count) fail("extract.holdout leaves no training samples");
  if (cfg.extract.model.clusters == 0 || cfg.extract.model.knn == 0 || cfg.extract.model.hidden == 0) {
    fail("extract.clusters, knn and hidden must be positive");
  }
  if (cfg.extract.model.batch == 0 || cfg.diffuse.model.batch == 0) fail("batch sizes must be positive");
  if (cfg.extract.model.lr_period == 0 || cfg.diffuse.model.lr_period == 0) fail("lr_period must be positive");
  if (!(cfg.extract.model.lr > 0.0) || !(cfg.diffuse.model.lr > 0.0)) fail("learning rates must be positive");
  if (cfg.diffuse.model.T == 0 || cfg.diffuse.model.sample_steps == 0 ||
      cfg.diffuse.model.sample_steps > cfg.diffuse.model.T) {
    fail("need 1 <= diffuse.sample_steps <= diffuse.T");
  }
  if (cfg.diffuse.model.net.hidden == 0) fail("diffuse.hidden must be positive");
  if (cfg.generate.count == 0) fail("generate.count must be positive");
  if (!geometry::template_from_name(cfg.generate.label)) fail("generate.label '" + cfg.generate.label + "' is not a template");
  if (cfg.eval.runs == 0) fail("eval.runs must be positive");
  metrics::require_valid(cfg.eval.id);
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  j["dims"] = {{"K", artgraph::kMaxParts}, {"F", artgraph::kLatentDim}};
  for (const auto& [key, f] : fields()) {
    if (!f.numeric_output) continue;
    const auto dot = key.find('.');
    j[key.substr(0, dot)][key.substr(dot + 1)] = f.get(cfg);
  }
  return j;
}

std::string config_hash(const RunConfig& cfg) { return numcore::fnv1a_hex(numcore::canonical_dump(to_json(cfg))); }

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, f] : fields()) {
    const auto dot = key.find('.');
    if (key.substr(0, dot) != section) {
      section = key.substr(0, dot);
      out << (out.tellp() > 0 ? "\n" : "") << "[" << section << "]\n";
    }
    out << key.substr(dot + 1) << " = " << f.get(cfg) << "\n";
  }
  return out.str();
}

numcore::Rng stage_rng(const RunConfig& cfg, Stage stage) {
  return numcore::Rng(cfg.seed).split(static_cast<std::uint64_t>(stage));
}

}  // namespace artigen::pipeline
