#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgopt/brent.hpp"
#include "dgopt/energy.hpp"
#include "dgopt/partition.hpp"

namespace dgopt {

enum class StepAction { increase, decrease, hold };

struct AdaptParams {
  double c1 = 0.7;
  double c2 = 0.9;
  double rho = 0.99;     // step shrink on decrease
  double lambda = 1.005; // step growth on increase
};

struct SolverConfig {
  double tau = 0.38;
  double tol = 1e-8;  // relative-decrement stop
  int max_sweeps = 500;
  OrderingKind ordering = OrderingKind::natural;
  uint64_t ordering_seed = 1;
  RootConfig root;
  int grad_stride = 0;  // record |grad| every k-th sweep; 0 = never
  double target_energy = std::numeric_limits<double>::quiet_NaN();
  std::optional<AdaptParams> adapt;
};

struct SweepRecord {
  int sweep = 0;        // 1-based
  double energy = 0.0;  // after this sweep (dissipation bookkeeping)
  double decrement = 0.0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double tau = 0.0;
  double wall_ms = 0.0;  // cumulative since run start
  StepAction action = StepAction::hold;
  bool has_action = false;
};

struct ConvergenceTrace {
  std::vector<SweepRecord> rows;
  std::vector<std::pair<std::string, std::string>> meta;

  void set_meta(const std::string& key, const std::string& value);
  void write_csv(const std::string& path) const;
  std::string csv() const;
};

enum class StopReason { tolerance, max_sweeps, target_energy, aborted };

struct RunResult {
  ImageGrid u;
  ConvergenceTrace trace;
  double energy = 0.0;  // final, bookkeeping
  double energy0 = 0.0;
  int sweeps = 0;
  StopReason reason = StopReason::max_sweeps;
  std::string message;
};

struct CoordRecord {
  int i = 0, j = 0;
  double beta = 0.0;
  double dv = 0.0;
  SolveStatus status = SolveStatus::flat;
};

// One Gauss–Seidel-style pass: every coordinate once, in `ord` order, each
// solving the implicit scalar equation on the evolving state. Returns the
// energy decrement V(u_before) - V(u_after) >= 0, assembled exactly from the
// per-coordinate realized changes.
double dg_sweep(const EnergyModel& en, ImageGrid& u, double tau,
                const Ordering& ord, const RootConfig& root,
                std::vector<CoordRecord>* detail = nullptr);

// Fixed-step run. Stops when decrement/|V(u0)| < tol (absolute decrement
// when |V(u0)| < 1e-300), on max_sweeps, or when the bookkeeping energy
// reaches cfg.target_energy. Never re-evaluates V for the stop test.
RunResult dg_run(const EnergyModel& en, const ImageGrid& u0,
                 const SolverConfig& cfg);

// Wolfe-like sweep classification from precomputed scalars:
// increase iff dV <= c1*g_old_dot; else decrease iff g_new_dot >= c2*g_old_dot;
// else hold.
StepAction wolfe_decide(double dv, double g_old_dot, double g_new_dot,
                        double c1, double c2);

// Standalone check (evaluates energies and gradients; smooth models only).
StepAction wolfe_check(const EnergyModel& en, const ImageGrid& u_old,
                       const ImageGrid& u_new, double c1, double c2);

// Adaptive-step run: tau *= lambda on increase, *= rho on decrease; the new
// state is always accepted. One gradient evaluation per sweep (the previous
// sweep's gradient is reused as grad-old).
RunResult dg_adapt_run(const EnergyModel& en, const ImageGrid& u0,
                       const SolverConfig& cfg);

// Shared run loop behind dg_run / dg_adapt_run and the parallel runner:
// trace bookkeeping, stop rules, optional Wolfe step adaptation. `sweep`
// advances the state in place and returns the sweep's energy decrement.
RunResult run_sweeps(
    const EnergyModel& en, const ImageGrid& u0, const SolverConfig& cfg,
    const std::function<double(ImageGrid&, double)>& sweep, bool adaptive,
    std::vector<std::pair<std::string, std::string>> extra_meta = {});

struct TheoryConstants {
  double L_max = 0.0;
  double tau_min = 0.0, tau_max = 0.0;
  double n = 0.0;
  int R = 0;
  double nu_general = 0.0;
  double nu_radius = 0.0;
  double tau_star_general = 0.0;
  double tau_star_radius = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double linear_factor = std::numeric_limits<double>::quiet_NaN();
};

// Stationarity-rate constants:
//   nu_general = 2 L^2 (tau_max n + tau_max / (L^2 tau_min^2))
//   nu_radius  = 2 L^2 ((2R+1)^2 tau_max + tau_max / (L^2 tau_min^2))
// with minimizing steps tau* = 1/(L sqrt(n)) resp. 1/((2R+1) L), and the
// linear factor 1 - 2 sigma / nu_radius when a PL parameter is supplied.
TheoryConstants theory_constants(
    double L_max, double tau_min, double tau_max, double n, int R,
    double sigma = std::numeric_limits<double>::quiet_NaN());

struct InpaintingRate {
  double rate = 0.0;  // predicted per-sweep log-decrement 2(2R+1) sqrt(eps) h^2 / a
  double sigma = 0.0;     // h^2
  double L_max = 0.0;     // h^2 (1 + 4 a eps^{-1/2} h^{-2})
  double tau_star = 0.0;  // 1 / ((2R+1) L_max)
  double nu = 0.0;        // 4 (2R+1) L_max
};

InpaintingRate tv_inpainting_rate(double h, double a, double eps, int R = 1);

struct SlopeFit {
  double rate = 0.0;  // decay rate per sweep (positive = decaying)
  bool ok = false;
  std::string note;
};

// Least-squares slope of log(rel_err) over the last half of the entries
// that sit above `floor`; flags short or badly non-monotone tails.
SlopeFit fit_log_slope(const std::vector<double>& rel_err,
                       double floor = 1e-13);

std::string to_string(StepAction a);
std::string to_string(StopReason r);

}  // namespace dgopt
