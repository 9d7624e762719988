#include "artigen/checks/suite.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "artigen/artgraph/io.hpp"
#include "artigen/artgraph/ops.hpp"
#include "artigen/checks/finite_diff.hpp"
#include "artigen/checks/spanning_trees.hpp"
#include "artigen/error.hpp"
#include "artigen/geometry/pointcloud.hpp"
#include "artigen/geometry/synth.hpp"
#include "artigen/hypernet/extractor.hpp"
#include "artigen/hypernet/hypergraph.hpp"
#include "artigen/jointdiff/denoiser.hpp"
#include "artigen/metrics/distance.hpp"
#include "artigen/metrics/distribution.hpp"

namespace artigen::checks {

namespace {

using artgraph::kEdgeDim;
using artgraph::kMaxParts;
using artgraph::kVertexDim;
using numcore::Rng;
using numcore::Shape;
using numcore::Tensor;

template <class Fn>
CheckResult timed(const std::string& name, Fn fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = name;
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// `eps` is the narrow step; smooth losses afford a wider one than relu nets.
CheckResult gradient_check(const std::string& name, std::size_t instances, double tolerance, double eps,
                           const std::function<std::pair<numcore::ParamSet, LossBuilder>(Rng&)>& make, Rng& rng) {
  return timed(name, [&](CheckResult& r) {
    double worst = 0.0;
    std::string where;
    for (std::size_t k = 0; k < instances; ++k) {
      auto [params, build] = make(rng);
      const auto g = check_gradients(std::move(params), build, eps);
      if (g.max_rel_error > worst) {
        worst = g.max_rel_error;
        where = "instance " + std::to_string(k) + " " + g.worst_param;
      }
    }
    r.passed = worst <= tolerance;
    r.detail = std::to_string(instances) + " instances, max rel error " + sci(worst) +
               (where.empty() ? "" : " at " + where) + " (limit " + sci(tolerance) + ")";
  });
}

Tensor random_example_edges(std::size_t pairs, Rng& rng) { return random_tensor(Shape{pairs, kEdgeDim}, rng); }

hypernet::Hypergraph random_hypergraph(std::size_t n, std::size_t e, Rng& rng) {
  Tensor h(Shape{n, e});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < e; ++j) h(i, j) = rng.uniform() < 0.3 ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) h(i, rng.below(e)) = 1.0;
  for (std::size_t j = 0; j < e; ++j) h(rng.below(n), j) = 1.0;
  std::vector<double> w(e);
  for (auto& v : w) v = rng.uniform(0.1, 2.0);
  return hypernet::make_hypergraph(std::move(h), std::move(w));
}

double brute_mmd(const Tensor& d) {
  double total = 0.0;
  for (std::size_t c = 0; c < d.cols(); ++c) {
    double best = INFINITY;
    for (std::size_t r = 0; r < d.rows(); ++r) best = std::min(best, d(r, c));
    total += best;
  }
  return total / static_cast<double>(d.cols());
}

double brute_cov(const Tensor& d) {
  std::set<std::size_t> hit;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    std::size_t arg = 0;
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (d(r, c) < d(r, arg)) arg = c;
    }
    hit.insert(arg);
  }
  return static_cast<double>(hit.size()) / static_cast<double>(d.cols());
}

double brute_one_nna(const Tensor& u, std::size_t generated) {
  const std::size_t n = u.rows();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && (arg == n || u(i, j) < u(i, arg))) arg = j;
    }
    correct += (arg < generated) == (i < generated);
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

Tensor random_symmetric(std::size_t n, Rng& rng) {
  Tensor d(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = rng.uniform(0.0, 10.0);
  }
  return d;
}

artgraph::ArticulationGraph without_label(artgraph::ArticulationGraph g) {
  g.label.clear();
  return g;
}

}  // namespace

std::vector<CheckResult> gradient_suite(std::size_t instances, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> out;

  out.push_back(gradient_check("gradient: colored-cloud loss", instances, tolerance, 1e-4, [](Rng& r) {
    const std::size_t n = 8 + r.below(25);
    numcore::ParamSet p;
    p.add("cloud", random_tensor(Shape{n, 6}, r));
    const Tensor target = random_tensor(Shape{n, 6}, r);
    LossBuilder build = [target](numcore::Tape& tape, const numcore::ParamSet& ps) {
      return geometry::loss_pc(tape.param(ps, "cloud"), target);
    };
    return std::pair{std::move(p), build};
  }, rng));

  out.push_back(gradient_check("gradient: extractor composite loss", instances, tolerance, 1e-4, [](Rng& r) {
    const std::size_t rows = kMaxParts * (1 + r.below(2));
    Tensor gt = random_tensor(Shape{rows, kVertexDim}, r);
    for (std::size_t i = 0; i < rows; ++i) gt(i, artgraph::kColExists) = r.uniform() < 0.5 ? 1.0 : 0.0;
    numcore::ParamSet p;
    p.add("pred", random_tensor(Shape{rows, kVertexDim}, r));
    hypernet::LossWeights w{r.uniform(0.1, 1.0), r.uniform(0.1, 1.0), r.uniform(0.1, 1.0)};
    LossBuilder build = [gt, w](numcore::Tape& tape, const numcore::ParamSet& ps) {
      return hypernet::loss_hg(tape.param(ps, "pred"), gt, w).total;
    };
    return std::pair{std::move(p), build};
  }, rng));

  out.push_back(gradient_check("gradient: noise-prediction objective", instances, tolerance, 1e-5, [](Rng& r) {
    jointdiff::DenoiserConfig net;
    net.hidden = 6;
    auto params = jointdiff::init_denoiser(net, r);
    // Non-zero biases keep pre-activations off the relu kink.
    for (const char* b : {"eps.0.b", "eps.1.b", "eps.2.b"}) params.value(b) = random_tensor(params.value(b).shape(), r);
    const auto s = jointdiff::make_schedule(100);
    const std::size_t parts = 2 + r.below(3), pairs = parts * (parts - 1) / 2;
    std::vector<jointdiff::DiffusionExample> batch;
    std::vector<std::size_t> ts;
    std::vector<Tensor> eps;
    for (int b = 0; b < 2; ++b) {
      batch.push_back({random_tensor(Shape{parts, kVertexDim}, r), random_example_edges(pairs, r)});
      ts.push_back(1 + r.below(s.steps));
      eps.push_back(jointdiff::standard_normal(Shape{pairs, kEdgeDim}, r));
    }
    LossBuilder build = [=](numcore::Tape& tape, const numcore::ParamSet& ps) {
      return jointdiff::denoiser_loss(tape, ps, batch, ts, eps, s);
    };
    return std::pair{std::move(params), build};
  }, rng));
  return out;
}

CheckResult schedule_identities(const jointdiff::NoiseSchedule& s) {
  return timed("schedule identities", [&](CheckResult& r) {
    std::size_t bad = 0, first = 0;
    auto flag = [&](std::size_t t) {
      if (bad++ == 0) first = t;
    };
    if (s.alpha_bar.at(0) != 1.0) flag(0);
    for (std::size_t t = 1; t <= s.steps; ++t) {
      double var = s.beta[t];
      if (s.rule == jointdiff::SigmaRule::kPosterior) var *= (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]);
      if (s.alpha_bar[t] != s.alpha_bar[t - 1] * s.alpha[t] || s.alpha[t] != 1.0 - s.beta[t] ||
          s.sigma[t] != std::sqrt(var)) {
        flag(t);
      }
    }
    r.passed = bad == 0;
    r.detail = std::to_string(s.steps) + " steps, " + std::to_string(bad) + " violations" +
               (bad ? " (first at t = " + std::to_string(first) + ")" : "");
  });
}

CheckResult inversion_at_one(const jointdiff::NoiseSchedule& s, double tolerance, std::uint64_t seed) {
  return timed("t=1 inversion", [&](CheckResult& r) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t parts = 2 + rng.below(kMaxParts - 1), pairs = parts * (parts - 1) / 2;
      const Tensor m0 = random_tensor(Shape{pairs, kEdgeDim}, rng, -2.0, 2.0);
      const Tensor eps = jointdiff::standard_normal(m0.shape(), rng);
      const Tensor m1 = jointdiff::q_sample(m0, 1, eps, s);
      const Tensor back = jointdiff::denoise_step(m1, 1, eps, Tensor(m0.shape()), s);
      for (std::size_t i = 0; i < m0.size(); ++i) worst = std::max(worst, std::abs(back[i] - m0[i]));
    }
    r.passed = worst <= tolerance;
    r.detail = "max |M0' - M0| = " + sci(worst) + " (limit " + sci(tolerance) + ")";
  });
}

CheckResult q_sample_moments(const jointdiff::NoiseSchedule& s, std::size_t draws, std::uint64_t seed) {
  return timed("q_sample moments", [&](CheckResult& r) {
    Rng rng(seed);
    const Tensor m0(Shape{1, 4}, {0.7, -1.3, 0.0, 2.0});
    double worst_z = 0.0;
    for (std::size_t t : {std::size_t{1}, s.steps / 2, s.steps}) {
      std::vector<double> sum(m0.size(), 0.0), sq(m0.size(), 0.0);
      for (std::size_t k = 0; k < draws; ++k) {
        const Tensor x = jointdiff::q_sample(m0, t, jointdiff::standard_normal(m0.shape(), rng), s);
        for (std::size_t i = 0; i < m0.size(); ++i) {
          sum[i] += x[i];
          sq[i] += x[i] * x[i];
        }
      }
      const double n = static_cast<double>(draws);
      const double var_true = 1.0 - s.alpha_bar[t];
      for (std::size_t i = 0; i < m0.size(); ++i) {
        const double mean = sum[i] / n;
        const double var = (sq[i] - n * mean * mean) / (n - 1.0);
        const double z_mean = std::abs(mean - std::sqrt(s.alpha_bar[t]) * m0[i]) / std::sqrt(var_true / n);
        const double z_var = std::abs(var - var_true) / (var_true * std::sqrt(2.0 / (n - 1.0)));
        worst_z = std::max({worst_z, z_mean, z_var});
      }
    }
    r.passed = worst_z <= 3.0;
    r.detail = std::to_string(draws) + " draws at t = 1, T/2, T; worst deviation " + sci(worst_z) + " SE (limit 3)";
  });
}

CheckResult hgnn_spectral(std::size_t graphs, double tolerance, std::uint64_t seed) {
  return timed("hgnn spectrum", [&](CheckResult& r) {
    Rng rng(seed);
    double worst_vec = 0.0, max_eig = -INFINITY, min_eig = INFINITY;
    for (std::size_t k = 0; k < graphs; ++k) {
      const auto hg = random_hypergraph(5 + rng.below(26), 2 + rng.below(12), rng);
      const Tensor s = hypernet::propagation_operator(hg);
      const std::size_t n = hg.vertex_count();
      Eigen::MatrixXd m(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s(i, j);
          acc += s(i, j) * std::sqrt(hg.vertex_degree[j]);
        }
        worst_vec = std::max(worst_vec, std::abs(acc - std::sqrt(hg.vertex_degree[i])));
      }
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
      max_eig = std::max(max_eig, ev.maxCoeff());
      min_eig = std::min(min_eig, ev.minCoeff());
    }
    // One vertex per hyperedge: S is the identity.
    Tensor eye(Shape{6, 6});
    for (std::size_t i = 0; i < 6; ++i) eye(i, i) = 1.0;
    const Tensor s_id = hypernet::propagation_operator(hypernet::make_hypergraph(eye, std::vector<double>(6, 1.0)));
    const bool identity = s_id == eye;
    r.passed = worst_vec <= tolerance && max_eig <= 1.0 + tolerance && min_eig >= -tolerance && identity;
    r.detail = std::to_string(graphs) + " hypergraphs, eigenvector residual " + sci(worst_vec) + ", spectrum [" +
               sci(min_eig) + ", " + sci(max_eig) + "], identity case " + (identity ? "exact" : "NOT exact");
  });
}

CheckResult mst_oracle(std::size_t instances, std::uint64_t seed) {
  return timed("mst oracle", [&](CheckResult& r) {
    Rng rng(seed);
    std::size_t agree = 0, trees = 0;
    for (std::size_t k = 0; k < instances; ++k) {
      const auto edges = random_complete_graph(4, rng, k % 2 == 1);
      const auto oracle = exhaustive_min_tree(4, edges);
      trees += oracle.spanning_trees;
      agree += artgraph::mst_extract({0, 1, 2, 3}, edges) == oracle.best;
    }
    r.passed = agree == instances && trees == 16 * instances;
    r.detail = std::to_string(agree) + "/" + std::to_string(instances) + " instances agree, " +
               std::to_string(trees) + " trees enumerated";
  });
}

CheckResult metric_oracles(std::size_t matrices, double tolerance, std::uint64_t seed) {
  return timed("metric oracles", [&](CheckResult& r) {
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < matrices; ++k) {
      const std::size_t g = 2 + rng.below(19), n_ref = 2 + rng.below(19);
      Tensor gr(Shape{g, n_ref});
      for (auto& v : gr.data()) v = rng.uniform(0.0, 10.0);
      const Tensor u = metrics::union_matrix(random_symmetric(g, rng), gr, random_symmetric(n_ref, rng));
      worst = std::max({worst, std::abs(metrics::mmd(gr) - brute_mmd(gr)), std::abs(metrics::cov(gr) - brute_cov(gr)),
                        std::abs(metrics::one_nna(u, g) - brute_one_nna(u, g))});
    }
    const std::size_t n = 10;
    Tensor sep(Shape{2 * n, 2 * n}), dup(Shape{2 * n, 2 * n});
    std::vector<double> pos(n);
    for (auto& p : pos) p = rng.uniform(0.0, 100.0);
    for (std::size_t i = 0; i < 2 * n; ++i) {
      for (std::size_t j = 0; j < 2 * n; ++j) {
        if (i != j) sep(i, j) = (i < n) == (j < n) ? 0.1 : 10.0;
        dup(i, j) = std::abs(pos[i % n] - pos[j % n]);
      }
    }
    const double separated = metrics::one_nna(sep, n), duplicated = metrics::one_nna(dup, n);
    r.passed = worst <= tolerance && separated == 1.0 && duplicated <= 0.55;
    r.detail = std::to_string(matrices) + " matrices, max loop difference " + sci(worst) + "; separated 1-NNA " +
               sci(separated) + "; duplicate-pool 1-NNA " + sci(duplicated);
  });
}

CheckResult roundtrips(std::size_t graphs, std::uint64_t seed) {
  return timed("graph round trips", [&](CheckResult& r) {
    Rng rng(seed);
    std::size_t json_ok = 0, matrix_ok = 0;
    std::set<std::string> labels;
    for (std::size_t k = 0; k < graphs; ++k) {
      const auto t = static_cast<geometry::Template>(k % geometry::kTemplateCount);
      const auto [lo, hi] = geometry::template_part_range(t);
      geometry::SynthSpec spec;
      spec.shape = t;
      spec.part_count = lo + rng.below(hi - lo + 1);
      spec.cloud_points = 16;
      const auto g = geometry::synth_dataset(spec, 1, rng).front().graph;
      labels.insert(g.label);
      const std::string text = artgraph::export_json(g);
      const auto back = artgraph::import_json(text);
      json_ok += back == g && artgraph::export_json(back) == text;
      const auto enc = artgraph::encode_graph(g);
      const auto dec = artgraph::decode_matrices(enc.vertices, enc.edges);
      const auto enc2 = artgraph::encode_graph(dec);
      matrix_ok += dec == without_label(g) && enc2.vertices == enc.vertices && enc2.edges == enc.edges;
    }
    r.passed = json_ok == graphs && matrix_ok == graphs && labels.size() == geometry::kTemplateCount;
    r.detail = std::to_string(graphs) + " graphs over " + std::to_string(labels.size()) + " templates: json " +
               std::to_string(json_ok) + " exact, matrices " + std::to_string(matrix_ok) + " exact";
  });
}

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opts,
                                       const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> out;
  auto add = [&](CheckResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  for (auto& r : gradient_suite(10, 1e-5, opts.seed)) add(std::move(r));
  auto s = jointdiff::make_schedule();
  if (opts.tamper_schedule) s.alpha_bar[1] -= 1e-3;
  add(schedule_identities(s));
  add(inversion_at_one(s, 1e-9, opts.seed + 1));
  add(q_sample_moments(s, 20000, opts.seed + 2));
  add(hgnn_spectral(20, 1e-9, opts.seed + 3));
  add(mst_oracle(200, opts.seed + 4));
  add(metric_oracles(50, 1e-12, opts.seed + 5));
  add(roundtrips(500, opts.seed + 6));
  return out;
}

std::string format_result(const CheckResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f s", r.seconds);
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + r.name + " (" + secs + ") " + r.detail;
}

}  // namespace artigen::checks
