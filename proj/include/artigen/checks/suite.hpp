#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "artigen/jointdiff/schedule.hpp"

namespace artigen::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Finite differences against the tape on `instances` random problems each for
// the colored-cloud loss, the composite extractor loss and the noise-prediction
// objective. Passes when every relative error is at most `tolerance`.
std::vector<CheckResult> gradient_suite(std::size_t instances, double tolerance, std::uint64_t seed);

// ᾱ_t = ᾱ_{t-1} α_t and α_t = 1 - β_t bit for bit, and σ_t per the rule.
CheckResult schedule_identities(const jointdiff::NoiseSchedule& s);
// q_sample at t = 1 followed by a reverse step with the true noise and z = 0
// recovers M_0 within `tolerance`.
CheckResult inversion_at_one(const jointdiff::NoiseSchedule& s, double tolerance, std::uint64_t seed);
// Sample mean and variance of q_sample within 3 standard errors of
// sqrt(ᾱ_t) m and 1 - ᾱ_t at t = 1, T/2, T.
CheckResult q_sample_moments(const jointdiff::NoiseSchedule& s, std::size_t draws, std::uint64_t seed);

// On random hypergraphs, S D_v^{1/2} 1 = D_v^{1/2} 1 within `tolerance` and
// every eigenvalue of S lies in [-tolerance, 1 + tolerance]; the identity
// hypergraph gives S = I exactly.
CheckResult hgnn_spectral(std::size_t graphs, double tolerance, std::uint64_t seed);

// mst_extract against exhaustive enumeration on random 4-node complete graphs,
// half of them with tied weights.
CheckResult mst_oracle(std::size_t instances, std::uint64_t seed);

// MMD, COV and 1-NNA against brute-force loops on random matrices, plus the
// separated-cluster and duplicate-pool constructions.
CheckResult metric_oracles(std::size_t matrices, double tolerance, std::uint64_t seed);

// Graph JSON and matrix encode/decode round trips on synthetic graphs from
// every template.
CheckResult roundtrips(std::size_t graphs, std::uint64_t seed);

struct SelfcheckOptions {
  bool tamper_schedule = false;  // lowers ᾱ_1 by 1e-3 before the schedule checks
  std::uint64_t seed = 0;
};
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opts,
                                       const std::function<void(const CheckResult&)>& on_result = {});

// "[PASS] name (1.2 s) detail"
std::string format_result(const CheckResult& r);

}  // namespace artigen::checks
