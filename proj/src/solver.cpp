#include "dgopt/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dgopt {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_adapt(const AdaptParams& p) {
  if (!(p.c1 > 0.0 && p.c1 < 1.0))
    throw std::invalid_argument("adapt: need c1 in (0,1)");
  if (!(p.c2 > p.c1 && p.c2 < 1.0))
    throw std::invalid_argument("adapt: need c2 in (c1,1)");
  if (!(p.rho > 0.0 && p.rho < 1.0))
    throw std::invalid_argument("adapt: need rho in (0,1)");
  if (!(p.lambda > 1.0)) throw std::invalid_argument("adapt: need lambda > 1");
}

void check_config(const SolverConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("solver: need tau > 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver: need tol > 0");
  if (cfg.max_sweeps < 1)
    throw std::invalid_argument("solver: need max_sweeps >= 1");
  if (cfg.grad_stride < 0)
    throw std::invalid_argument("solver: need grad_stride >= 0");
}

}  // namespace

std::string to_string(StepAction a) {
  switch (a) {
    case StepAction::increase:
      return "increase";
    case StepAction::decrease:
      return "decrease";
    case StepAction::hold:
      return "hold";
  }
  return "?";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance:
      return "tolerance";
    case StopReason::max_sweeps:
      return "max_sweeps";
    case StopReason::target_energy:
      return "target_energy";
    case StopReason::aborted:
      return "aborted";
  }
  return "?";
}

void ConvergenceTrace::set_meta(const std::string& key,
                                const std::string& value) {
  for (auto& kv : meta)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  meta.push_back({key, value});
}

std::string ConvergenceTrace::csv() const {
  std::ostringstream out;
  for (const auto& kv : meta) out << "# " << kv.first << "=" << kv.second << "\n";
  out << "sweep,energy,decrement,grad_norm,tau,wall_ms,action\n";
  for (const SweepRecord& r : rows) {
    out << r.sweep << "," << fmt(r.energy) << "," << fmt(r.decrement) << ",";
    if (!std::isnan(r.grad_norm)) out << fmt(r.grad_norm);
    out << "," << fmt(r.tau) << "," << fmt(r.wall_ms) << ",";
    if (r.has_action) out << to_string(r.action);
    out << "\n";
  }
  return out.str();
}

void ConvergenceTrace::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write trace " + path);
  f << csv();
  if (!f) throw std::runtime_error("short trace write " + path);
}

double dg_sweep(const EnergyModel& en, ImageGrid& u, double tau,
                const Ordering& ord, const RootConfig& root,
                std::vector<CoordRecord>* detail) {
  if (ord.visit.size() != u.size())
    throw std::invalid_argument("dg_sweep: ordering does not cover the grid");
  double dec = 0.0;
  for (const Index& p : ord.visit) {
    SolveResult r = solve_beta(en, u, p.i, p.j, tau, root);
    if (r.beta != 0.0) u.at(p.i, p.j) += r.beta;
    dec -= r.dv;
    if (detail) detail->push_back({p.i, p.j, r.beta, r.dv, r.status});
  }
  return dec;
}

StepAction wolfe_decide(double dv, double g_old_dot, double g_new_dot,
                        double c1, double c2) {
  if (dv <= c1 * g_old_dot) return StepAction::increase;
  if (g_new_dot >= c2 * g_old_dot) return StepAction::decrease;
  return StepAction::hold;
}

StepAction wolfe_check(const EnergyModel& en, const ImageGrid& u_old,
                       const ImageGrid& u_new, double c1, double c2) {
  if (!(c1 > 0.0 && c1 < 1.0 && c2 > c1 && c2 < 1.0))
    throw std::invalid_argument("wolfe_check: need 0 < c1 < c2 < 1");
  double dv = en.eval(u_new) - en.eval(u_old);
  ImageGrid g_old = en.gradient(u_old);
  ImageGrid g_new = en.gradient(u_new);
  double gd_old = 0.0, gd_new = 0.0;
  for (size_t k = 0; k < u_old.size(); ++k) {
    double du = u_new.v[k] - u_old.v[k];
    gd_old += g_old.v[k] * du;
    gd_new += g_new.v[k] * du;
  }
  return wolfe_decide(dv, gd_old, gd_new, c1, c2);
}

RunResult run_sweeps(
    const EnergyModel& en, const ImageGrid& u0, const SolverConfig& cfg,
    const std::function<double(ImageGrid&, double)>& sweep, bool adaptive,
    std::vector<std::pair<std::string, std::string>> extra_meta) {
  check_config(cfg);
  AdaptParams ap = cfg.adapt.value_or(AdaptParams{});
  if (adaptive) {
    if (!cfg.adapt)
      throw std::invalid_argument("solver: adapt parameters required");
    check_adapt(ap);
  }

  RunResult res;
  res.u = u0;
  double E = en.eval(u0);
  if (!std::isfinite(E)) {
    res.reason = StopReason::aborted;
    res.message = "non-finite initial energy";
    res.energy = res.energy0 = E;
    return res;
  }
  res.energy0 = E;
  const double denom = std::abs(E) < 1e-300 ? 1.0 : std::abs(E);

  ImageGrid grad_prev;
  if (adaptive) grad_prev = en.gradient(u0);
  ImageGrid u_prev;

  double tau = cfg.tau;
  auto t0 = std::chrono::steady_clock::now();
  res.reason = StopReason::max_sweeps;

  for (int k = 1; k <= cfg.max_sweeps; ++k) {
    if (adaptive) u_prev = res.u;
    double dec = sweep(res.u, tau);
    E -= dec;

    SweepRecord row;
    row.sweep = k;
    row.energy = E;
    row.decrement = dec;
    row.tau = tau;

    if (!std::isfinite(E) || !std::isfinite(dec)) {
      res.trace.rows.push_back(row);
      res.sweeps = k;
      res.reason = StopReason::aborted;
      res.message = "non-finite energy at sweep " + std::to_string(k);
      break;
    }

    if (adaptive) {
      ImageGrid g_new = en.gradient(res.u);
      double gd_old = 0.0, gd_new = 0.0;
      for (size_t q = 0; q < res.u.size(); ++q) {
        double du = res.u.v[q] - u_prev.v[q];
        gd_old += grad_prev.v[q] * du;
        gd_new += g_new.v[q] * du;
      }
      StepAction act = wolfe_decide(-dec, gd_old, gd_new, ap.c1, ap.c2);
      if (act == StepAction::increase)
        tau *= ap.lambda;
      else if (act == StepAction::decrease)
        tau *= ap.rho;
      row.action = act;
      row.has_action = true;
      row.grad_norm = std::sqrt(norm_sq(g_new));
      grad_prev = std::move(g_new);
    } else if (cfg.grad_stride > 0 && k % cfg.grad_stride == 0) {
      row.grad_norm = std::sqrt(norm_sq(en.gradient(res.u)));
    }

    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    res.trace.rows.push_back(row);
    res.sweeps = k;

    if (!std::isnan(cfg.target_energy) && E <= cfg.target_energy) {
      res.reason = StopReason::target_energy;
      break;
    }
    if (dec / denom < cfg.tol) {
      res.reason = StopReason::tolerance;
      break;
    }
  }

  res.energy = E;
  res.trace.set_meta("energy0", fmt(res.energy0));
  res.trace.set_meta("tau0", fmt(cfg.tau));
  res.trace.set_meta("tol", fmt(cfg.tol));
  res.trace.set_meta("max_sweeps", std::to_string(cfg.max_sweeps));
  res.trace.set_meta("adaptive", adaptive ? "1" : "0");
  res.trace.set_meta("stop", to_string(res.reason));
  for (auto& kv : extra_meta) res.trace.set_meta(kv.first, kv.second);
  return res;
}

namespace {

std::function<double(ImageGrid&, double)> serial_sweep_fn(
    const EnergyModel& en, const ImageGrid& u0, const SolverConfig& cfg) {
  Dims d{u0.nx, u0.ny};
  Ordering ord;
  switch (cfg.ordering) {
    case OrderingKind::natural:
      ord = make_natural(d);
      break;
    case OrderingKind::red_black:
      ord = make_red_black(d);
      break;
    case OrderingKind::random:
      ord = make_random(d, cfg.ordering_seed);
      break;
    case OrderingKind::block:
      // default 2x2 layout at the model's read radius
      ord = make_block(build_partition(d, std::max(1, en.read_radius()), 2, 2));
      break;
  }
  RootConfig root = cfg.root;
  return [&en, ord = std::move(ord), root](ImageGrid& u, double tau) {
    return dg_sweep(en, u, tau, ord, root, nullptr);
  };
}

}  // namespace

RunResult dg_run(const EnergyModel& en, const ImageGrid& u0,
                 const SolverConfig& cfg) {
  auto res = run_sweeps(en, u0, cfg, serial_sweep_fn(en, u0, cfg), false,
                        {{"solver", "dg"}});
  return res;
}

RunResult dg_adapt_run(const EnergyModel& en, const ImageGrid& u0,
                       const SolverConfig& cfg) {
  if (!en.smooth())
    throw std::invalid_argument("dg_adapt_run: smooth objective required");
  return run_sweeps(en, u0, cfg, serial_sweep_fn(en, u0, cfg), true,
                    {{"solver", "dg_adapt"}});
}

TheoryConstants theory_constants(double L_max, double tau_min, double tau_max,
                                 double n, int R, double sigma) {
  if (!(L_max > 0.0 && tau_min > 0.0 && tau_max > 0.0 && n > 0.0 && R >= 0))
    throw std::invalid_argument("theory_constants: non-positive input");
  TheoryConstants t;
  t.L_max = L_max;
  t.tau_min = tau_min;
  t.tau_max = tau_max;
  t.n = n;
  t.R = R;
  double L2 = L_max * L_max;
  double inv = tau_max / (L2 * tau_min * tau_min);
  t.nu_general = 2.0 * L2 * (tau_max * n + inv);
  double w = double(2 * R + 1);
  t.nu_radius = 2.0 * L2 * (w * w * tau_max + inv);
  t.tau_star_general = 1.0 / (L_max * std::sqrt(n));
  t.tau_star_radius = 1.0 / (w * L_max);
  t.sigma = sigma;
  if (!std::isnan(sigma)) t.linear_factor = 1.0 - 2.0 * sigma / t.nu_radius;
  return t;
}

InpaintingRate tv_inpainting_rate(double h, double a, double eps, int R) {
  if (!(h > 0.0 && a > 0.0 && eps > 0.0 && R >= 0))
    throw std::invalid_argument("tv_inpainting_rate: non-positive input");
  InpaintingRate r;
  double w = double(2 * R + 1);
  r.rate = 2.0 * w * std::sqrt(eps) * h * h / a;
  r.sigma = h * h;
  r.L_max = h * h * (1.0 + 4.0 * a / (std::sqrt(eps) * h * h));
  r.tau_star = 1.0 / (w * r.L_max);
  r.nu = 4.0 * w * r.L_max;
  return r;
}

SlopeFit fit_log_slope(const std::vector<double>& rel_err, double floor) {
  SlopeFit fit;
  size_t t = 0;
  while (t < rel_err.size() && std::isfinite(rel_err[t]) && rel_err[t] > floor)
    ++t;
  if (t < 5) {
    fit.note = "too few points above floor";
    return fit;
  }
  size_t lo = t / 2;
  bool bounce = false;
  for (size_t k = lo; k + 1 < t; ++k)
    if (rel_err[k + 1] > 1.5 * rel_err[k]) bounce = true;

  double n = double(t - lo);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = lo; k < t; ++k) {
    double x = double(k), y = std::log(rel_err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.rate = -slope;
  if (bounce) {
    fit.note = "non-monotone tail";
  } else if (fit.rate <= 0.0) {
    fit.note = "no decay in window";
  } else {
    fit.ok = true;
  }
  return fit;
}

}  // namespace dgopt
