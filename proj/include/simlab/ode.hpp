// simlab - adaptive Dormand-Prince 5(4) integration.

#pragma once

#include <cmath>
#include <functional>

#include "simlab/common.hpp"

namespace simlab {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = 0.25;
  long max_steps = 10'000'000;
};

enum class StepOutcome { ok, step_underflow, max_steps };

// RHS signature: dy = f(t, y).
using OdeRhs = std::function<Vec(double, const Vec&)>;

// Integrates from (t0, y0) to t_end. on_step is called after every accepted
// step with (t_prev, y_prev, t_new, y_new) and may return false to stop early.
StepOutcome integrate_adaptive(
    const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const OdeOptions& opts,
    const std::function<bool(double, const Vec&, double, const Vec&)>& on_step,
    double* t_reached = nullptr, Vec* y_reached = nullptr);

// Convenience: integrate to t_end, returning the final state.
Vec integrate_to(const OdeRhs& rhs, double t0, const Vec& y0, double t_end,
                 const OdeOptions& opts);

}  // namespace simlab
