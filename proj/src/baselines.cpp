#include "dgopt/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dgopt {

namespace {

void check_params(const BaselineConfig& cfg) {
  const ArmijoParams& a = cfg.armijo;
  if (!(a.s0 > 0.0)) throw std::invalid_argument("armijo: need s0 > 0");
  if (!(a.theta > 0.0 && a.theta < 1.0))
    throw std::invalid_argument("armijo: need theta in (0,1)");
  if (!(a.c > 0.0 && a.c < 1.0))
    throw std::invalid_argument("armijo: need c in (0,1)");
  if (a.max_backtracks < 1)
    throw std::invalid_argument("armijo: need max_backtracks >= 1");
  if (!(a.beta_m >= 0.0 && a.beta_m < 1.0))
    throw std::invalid_argument("armijo: need beta_m in [0,1)");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("baseline: need tol > 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("baseline: need max_iters >= 1");
}

struct ArmijoStep {
  ImageGrid u;
  double energy = 0.0;
  double s = 0.0;
  bool accepted = false;
};

// Backtracks from s0 until V(u - s g) <= V(u) - c s |g|^2.
ArmijoStep armijo(const EnergyModel& en, const ImageGrid& u, double energy,
                  const ImageGrid& g, double gn2, const ArmijoParams& p) {
  ArmijoStep st;
  double s = p.s0;
  for (int bt = 0; bt <= p.max_backtracks; ++bt) {
    ImageGrid trial = u;
    for (size_t k = 0; k < trial.size(); ++k) trial.v[k] -= s * g.v[k];
    double e = en.eval(trial);
    if (e <= energy - p.c * s * gn2) {
      st.u = std::move(trial);
      st.energy = e;
      st.s = s;
      st.accepted = true;
      return st;
    }
    s *= p.theta;
  }
  return st;
}

RunResult first_order_run(const EnergyModel& en, const ImageGrid& u0,
                          const BaselineConfig& cfg, bool momentum,
                          const char* name) {
  check_params(cfg);
  if (!en.smooth())
    throw std::invalid_argument(std::string(name) +
                                ": smooth objective required");

  RunResult res;
  res.u = u0;
  double E = en.eval(u0);
  res.energy0 = E;
  if (!std::isfinite(E)) {
    res.reason = StopReason::aborted;
    res.message = "non-finite initial energy";
    res.energy = E;
    return res;
  }
  const double denom = std::abs(E) < 1e-300 ? 1.0 : std::abs(E);
  const double bm = momentum ? cfg.armijo.beta_m : 0.0;

  ImageGrid u_prev = u0;  // u^{-1} = u^0
  res.reason = StopReason::max_sweeps;
  auto t0 = std::chrono::steady_clock::now();

  for (int k = 1; k <= cfg.max_iters; ++k) {
    ImageGrid g = en.gradient(res.u);
    double gn2 = norm_sq(g);
    double gn = std::sqrt(gn2);
    if (cfg.grad_tol > 0.0 && gn <= cfg.grad_tol) {
      res.reason = StopReason::tolerance;
      res.message = "gradient below grad_tol";
      break;
    }

    ArmijoStep st = armijo(en, res.u, E, g, gn2, cfg.armijo);
    if (!st.accepted) {
      res.reason = StopReason::aborted;
      res.message = "armijo backtracking exhausted at iteration " +
                    std::to_string(k);
      res.trace.set_meta("armijo_exhausted", "1");
      break;
    }

    ImageGrid u_next = std::move(st.u);
    double E_next = st.energy;
    if (bm != 0.0) {
      for (size_t q = 0; q < u_next.size(); ++q)
        u_next.v[q] += bm * (res.u.v[q] - u_prev.v[q]);
      E_next = en.eval(u_next);  // momentum may move energy either way
    }
    double dec = E - E_next;
    u_prev = std::move(res.u);
    res.u = std::move(u_next);
    E = E_next;

    SweepRecord row;
    row.sweep = k;
    row.energy = E;
    row.decrement = dec;
    row.grad_norm = gn;
    row.tau = st.s;
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    res.trace.rows.push_back(row);
    res.sweeps = k;

    if (!std::isfinite(E)) {
      res.reason = StopReason::aborted;
      res.message = "non-finite energy at iteration " + std::to_string(k);
      break;
    }
    if (!std::isnan(cfg.target_energy) && E <= cfg.target_energy) {
      res.reason = StopReason::target_energy;
      break;
    }
    if (std::abs(dec) / denom < cfg.tol) {
      res.reason = StopReason::tolerance;
      break;
    }
  }

  res.energy = E;
  res.trace.set_meta("solver", name);
  res.trace.set_meta("stop", to_string(res.reason));
  return res;
}

}  // namespace

RunResult gradient_descent_run(const EnergyModel& en, const ImageGrid& u0,
                               const BaselineConfig& cfg) {
  return first_order_run(en, u0, cfg, false, "gd");
}

RunResult heavy_ball_run(const EnergyModel& en, const ImageGrid& u0,
                         const BaselineConfig& cfg) {
  return first_order_run(en, u0, cfg, true, "heavy_ball");
}

}  // namespace dgopt
