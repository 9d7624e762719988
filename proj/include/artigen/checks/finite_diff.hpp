#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "artigen/numcore/autodiff.hpp"
#include "artigen/numcore/params.hpp"

namespace artigen::checks {

// Builds the loss on a fresh tape from `params` and returns it.
using LossBuilder = std::function<numcore::Var(numcore::Tape&, const numcore::ParamSet&)>;

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst_param;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries = 0;
};

// Central finite differences over every scalar of every parameter, compared
// with the tape's reverse sweep. Relative error per entry is
// |analytic - numeric| / max(|analytic|, |numeric|, floor).
//
// Each entry is differenced at `eps` and at 10 * eps. When the two agree to
// within `agree` the wider step is used, since it carries a tenth of the
// rounding error; when they disagree a relu kink lies inside the wider step
// and the narrow one is kept.
inline GradCheck check_gradients(numcore::ParamSet params, const LossBuilder& build, double eps = 1e-5,
                                 double floor = 1e-6, double agree = 1e-9) {
  numcore::Gradients analytic;
  {
    numcore::Tape tape;
    auto loss = build(tape, params);
    analytic = tape.backward(loss, params);
  }
  auto eval = [&](const numcore::ParamSet& p) {
    numcore::Tape tape(false);
    return build(tape, p).value().item();
  };
  GradCheck result;
  for (const auto& name : params.names()) {
    auto& value = params.value(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double orig = value[i];
      auto central = [&](double h) {
        value[i] = orig + h;
        const double up = eval(params);
        value[i] = orig - h;
        const double down = eval(params);
        value[i] = orig;
        return (up - down) / (2.0 * h);
      };
      const double narrow = central(eps);
      const double wide = central(10.0 * eps);
      const double numeric = std::abs(wide - narrow) <= agree ? wide : narrow;
      const double a = analytic.at(name)[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++result.entries;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = name + "[" + std::to_string(i) + "]";
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

inline numcore::Tensor random_tensor(numcore::Shape shape, numcore::Rng& rng, double lo = -1.0, double hi = 1.0) {
  numcore::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace artigen::checks
