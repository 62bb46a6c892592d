#pragma once

#include "dgopt/solver.hpp"

namespace dgopt {

struct ArmijoParams {
  double s0 = 1.0;          // initial trial step, reset every iteration
  double theta = 0.5;       // backtrack factor
  double c = 1e-4;          // sufficient-decrease constant
  int max_backtracks = 50;
  double beta_m = 0.9;      // momentum (heavy-ball only)
};

struct BaselineConfig {
  ArmijoParams armijo;
  double tol = 1e-8;  // relative-decrement stop, shared with the sweep solvers
  int max_iters = 1000;
  double target_energy = std::numeric_limits<double>::quiet_NaN();
  double grad_tol = 0.0;  // stop when |grad| falls below (0 disables)
};

// u_{k+1} = u_k - s_k grad V(u_k), s_k by Armijo backtracking from s0.
// Smooth models only. Backtracking exhaustion stops the run with a flag.
RunResult gradient_descent_run(const EnergyModel& en, const ImageGrid& u0,
                               const BaselineConfig& cfg);

// u_{k+1} = u_k - s_k grad V(u_k) + beta_m (u_k - u_{k-1}); the Armijo test
// applies to the gradient sub-step only, so energies may oscillate.
RunResult heavy_ball_run(const EnergyModel& en, const ImageGrid& u0,
                         const BaselineConfig& cfg);

}  // namespace dgopt
