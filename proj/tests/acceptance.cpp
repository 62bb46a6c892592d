// Acceptance gate: ten end-to-end checks of the solver guarantees, one
// PASS/FAIL line each. Exits nonzero if any check fails. Tolerances are
// pinned here, next to the checks that use them.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "dgopt/baselines.hpp"
#include "dgopt/energy.hpp"
#include "dgopt/image.hpp"
#include "dgopt/objective.hpp"
#include "dgopt/parallel.hpp"
#include "dgopt/partition.hpp"
#include "dgopt/rng.hpp"
#include "dgopt/solver.hpp"

using namespace dgopt;

namespace {

constexpr double kIdentityTol = 1e-8;   // dissipation + mean-value identity
constexpr double kLocalDiffTol = 1e-10;  // local difference vs full eval
constexpr double kGradRelTol = 1e-5;     // analytic gradient vs central FD
constexpr double kParallelTol = 1e-12;   // parallel vs serial block sweep
constexpr double kStepFloorSlack = 1e-12;
constexpr double kRelOptTarget = 1e-6;   // ordering study convergence
constexpr double kRateFitFactor = 3.0;   // fitted vs predicted linear rate
constexpr double kSlopeSpread = 2.0;     // ordering slope agreement

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool report(int id, bool pass, const std::string& detail) {
  std::printf("%s: %2d  %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ImageGrid noisy_phantom(int n, double sigma, uint64_t seed) {
  return corrupt(make_phantom(n, n), GaussianNoise{sigma}, seed);
}

Objective elastica_denoise(int n, double eps, uint64_t seed) {
  ObjectiveSpec sp;
  sp.reg = RegKind::elastica;
  sp.a = 0.9;
  sp.b = 0.9;
  sp.eps = eps;
  sp.fid = FidKind::l2sq;
  return Objective(sp, noisy_phantom(n, 0.2, seed));
}

// Square-hole inpainting model at resolution 2^m: zero data on the known
// region, area-weighted TV, so the flat zero image is the exact optimum.
struct HoleModel {
  Objective ob;
  ImageGrid u0;
  double v_star;
  InpaintingRate pred;
};

HoleModel hole_model(int m, uint64_t seed) {
  int nx = 1 << m;
  ObjectiveSpec sp;
  sp.reg = RegKind::tv_eps;
  sp.a = 1.0 / 16.0;
  sp.b = 0.0;
  sp.eps = 0.1;
  sp.fid = FidKind::l2sq;
  sp.area_weights = true;
  ImageGrid zero(nx, nx, 0.0);
  Mask mask = make_mask_center_square(nx, nx);
  Objective ob(sp, zero, mask);
  double v_star = ob.eval(zero);
  ImageGrid u0(nx, nx, 0.0);
  Rng rng(seed);
  for (int j = 0; j < nx; ++j)
    for (int i = 0; i < nx; ++i)
      if (!mask.at(i, j)) u0.at(i, j) = rng.uniform();
  InpaintingRate pred = tv_inpainting_rate(1.0 / nx, sp.a, sp.eps, 1);
  return {std::move(ob), std::move(u0), v_star, pred};
}

std::vector<double> rel_errors(const RunResult& r, double v0, double v_star) {
  std::vector<double> rel;
  rel.reserve(r.trace.rows.size());
  for (const auto& row : r.trace.rows)
    rel.push_back((row.energy - v_star) / (v0 - v_star));
  return rel;
}

// 1: every sweep of every solver dissipates, and the reported decrement
// matches the true energy drop.
bool criterion1() {
  double t0 = now_s();
  Objective ob = elastica_denoise(32, 1e-4, 11);
  ImageGrid u0 = noisy_phantom(32, 0.2, 11);
  Ordering nat = make_natural({32, 32});
  RootConfig root;
  Partition part = build_partition({32, 32}, ob.read_radius(), 2, 2);
  ParallelPlan plan = make_plan(part, 4);

  double worst_mono = 0.0, worst_id = 0.0;
  bool ok = true;
  for (double tau : {1e-3, 1.0, 1e3}) {
    for (int solver = 0; solver < 3; ++solver) {
      ImageGrid u = u0;
      double v_prev = ob.eval(u);
      double t = tau;
      AdaptParams ap;
      for (int k = 0; k < 30; ++k) {
        ImageGrid u_old = u;
        double dec = 0.0;
        if (solver == 0) {
          dec = dg_sweep(ob, u, t, nat, root);
        } else if (solver == 1) {
          dec = dg_sweep(ob, u, t, nat, root);
          StepAction act = wolfe_check(ob, u_old, u, ap.c1, ap.c2);
          if (act == StepAction::increase) t *= ap.lambda;
          if (act == StepAction::decrease) t *= ap.rho;
        } else {
          dec = dg_parallel_sweep(ob, u, t, plan, root);
        }
        double v_next = ob.eval(u);
        double scale = kIdentityTol * (1.0 + std::fabs(v_prev));
        worst_mono = std::max(worst_mono, v_next - v_prev);
        worst_id = std::max(worst_id,
                            std::fabs(dec - (v_prev - v_next)) - scale);
        if (v_next > v_prev + scale) ok = false;
        if (std::fabs(dec - (v_prev - v_next)) > scale) ok = false;
        v_prev = v_next;
      }
    }
  }
  double dt = now_s() - t0;
  if (dt >= 60.0) ok = false;
  return report(
      1, ok,
      fmt("dissipation, 3 solvers x tau {1e-3,1,1e3} x 30 sweeps: worst "
          "energy rise %.3g, decrement-identity margin %.3g (tol 1e-8 "
          "scaled), %.1fs (<60s)",
          worst_mono, worst_id, dt));
}

// 2: the per-coordinate realized changes assemble the sweep's total energy
// change (mean-value / discrete-gradient identity).
bool criterion2() {
  Objective ob = elastica_denoise(12, 1e-4, 13);
  ImageGrid u = noisy_phantom(12, 0.2, 13);
  RootConfig root;
  double v_before = ob.eval(u);
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 100; ++k) {
    Ordering ord = make_random({12, 12}, 1000 + k);
    std::vector<CoordRecord> detail;
    dg_sweep(ob, u, 0.38, ord, root, &detail);
    double v_after = ob.eval(u);
    double sum_dv = 0.0;
    for (const auto& rec : detail) sum_dv += rec.dv;
    double err = std::fabs(sum_dv - (v_after - v_before));
    double scale = kIdentityTol * (1.0 + std::fabs(v_before));
    worst = std::max(worst, err / scale);
    if (err > scale) ok = false;
    v_before = v_after;
  }
  return report(2, ok,
                fmt("coordinatewise mean-value identity over 100 random "
                    "sweeps: worst error %.3g of the 1e-8 budget",
                    worst));
}

// 3: local differences agree with full evaluation, and pixels beyond the
// model's read radius cannot affect them.
bool criterion3() {
  struct Case {
    Objective ob;
    int far_dist;  // first distance that must NOT affect a local diff
  };
  Rng rng(17);
  auto rand_grid = [&rng](int n) {
    ImageGrid g(n, n);
    for (double& x : g.v) x = rng.uniform();
    return g;
  };
  Mask mask(8, 8, 1);
  mask.set(1, 2, 0);
  mask.set(5, 5, 0);
  mask.set(6, 1, 0);

  std::vector<Case> cases;
  {
    ObjectiveSpec sp;
    sp.reg = RegKind::elastica;
    sp.a = 0.9;
    sp.b = 0.9;
    sp.eps = 1e-2;
    sp.fid = FidKind::l2sq;
    cases.push_back({Objective(sp, rand_grid(8)), 3});
    sp.eps = 1e-4;
    sp.a = 0.5;
    sp.b = 0.3;
    sp.area_weights = true;
    cases.push_back({Objective(sp, rand_grid(8), mask), 3});
    sp = ObjectiveSpec{};
    sp.reg = RegKind::tv_eps;
    sp.a = 0.8;
    sp.b = 0.0;
    sp.eps = 1e-2;
    sp.fid = FidKind::l1_smoothed;
    sp.fid_eps = 1e-6;
    cases.push_back({Objective(sp, rand_grid(8), mask), 2});
    sp.reg = RegKind::tv_curvature;
    sp.b = 0.7;
    sp.eps = 1e-4;
    sp.fid = FidKind::l2sq;
    cases.push_back({Objective(sp, rand_grid(8)), 3});
  }

  double worst = 0.0;
  bool ok = true;
  int radius_checks = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Case& c = cases[size_t(trial) % cases.size()];
    ImageGrid u = rand_grid(8);
    int i = int(rng.below(8)), j = int(rng.below(8));
    double beta = (2.0 * rng.uniform() - 1.0) *
                  std::pow(10.0, -3.0 * rng.uniform());
    double v = c.ob.eval(u);
    CoordScratch s;
    c.ob.coord_begin(u, i, j, s);
    double ld = c.ob.coord_delta(s, beta);
    ImageGrid u2 = u;
    u2.at(i, j) += beta;
    double err = std::fabs(ld - (c.ob.eval(u2) - v));
    double scale = kLocalDiffTol * (1.0 + std::fabs(v));
    worst = std::max(worst, err / scale);
    if (err > scale) ok = false;

    if (trial % 10 == 0) {
      // a pixel at Chebyshev distance far_dist must leave the local
      // difference bitwise unchanged
      int ii = 2, jj = 2;
      int fi = ii + c.far_dist, fj = jj;
      ImageGrid u3 = u;
      u3.at(fi, fj) += 0.37;
      CoordScratch s3;
      c.ob.coord_begin(u3, ii, jj, s3);
      CoordScratch s0;
      c.ob.coord_begin(u, ii, jj, s0);
      if (c.ob.coord_delta(s0, beta) != c.ob.coord_delta(s3, beta)) ok = false;
      ++radius_checks;
    }
  }
  return report(3, ok,
                fmt("10000 local-difference checks: worst error %.3g of the "
                    "1e-10 budget; %d read-radius checks (dist 2 for 3x3 "
                    "models, dist 3 for curvature)",
                    worst, radius_checks));
}

// 4: analytic gradients match central finite differences componentwise.
bool criterion4() {
  double t0 = now_s();
  Rng rng(19);
  auto rand_grid = [&rng](int n) {
    ImageGrid g(n, n);
    for (double& x : g.v) x = rng.uniform();
    return g;
  };
  double worst = 0.0;
  bool ok = true;
  for (double eps : {1e-2, 1e-4}) {
    for (int which = 0; which < 2; ++which) {
      ObjectiveSpec sp;
      if (which == 0) {
        sp.reg = RegKind::elastica;
        sp.a = 0.9;
        sp.b = 0.9;
      } else {
        sp.reg = RegKind::tv_eps;
        sp.a = 0.8;
        sp.b = 0.0;
      }
      sp.eps = eps;
      sp.fid = FidKind::l2sq;
      Objective ob(sp, rand_grid(8));
      ImageGrid u = rand_grid(8);
      ImageGrid an = ob.gradient(u);
      const double h = 1e-5;
      for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
          ImageGrid up = u, um = u;
          up.at(i, j) += h;
          um.at(i, j) -= h;
          double fd = (ob.eval(up) - ob.eval(um)) / (2.0 * h);
          double rel =
              std::fabs(fd - an.at(i, j)) / (1.0 + std::fabs(an.at(i, j)));
          worst = std::max(worst, rel);
          if (rel > kGradRelTol) ok = false;
        }
      }
    }
  }
  double dt = now_s() - t0;
  if (dt >= 30.0) ok = false;
  return report(4, ok,
                fmt("gradient vs central differences, elastica + smoothed "
                    "TV, eps {1e-2,1e-4}: worst componentwise rel %.3g "
                    "(tol 1e-5), %.1fs (<30s)",
                    worst, dt));
}

// 5: stationarity bound min_j |grad V(u_j)|^2 <= nu (V(u0) - V*) / k.
bool criterion5() {
  HoleModel hm = hole_model(5, 21);
  SolverConfig ref_cfg;
  ref_cfg.tau = hm.pred.tau_star;
  ref_cfg.tol = 1e-300;
  ref_cfg.max_sweeps = 20000;
  RunResult ref = dg_run(hm.ob, hm.u0, ref_cfg);
  double v_star = hm.ob.eval(ref.u);

  SolverConfig cfg = ref_cfg;
  cfg.max_sweeps = 3000;
  cfg.grad_stride = 1;
  RunResult r = dg_run(hm.ob, hm.u0, cfg);

  double v0 = hm.ob.eval(hm.u0);
  double nu = hm.pred.nu;
  double min_sq = norm_sq(hm.ob.gradient(hm.u0));
  double worst_ratio = 0.0;
  bool ok = true;
  for (const auto& row : r.trace.rows) {
    if (std::isnan(row.grad_norm)) continue;
    min_sq = std::min(min_sq, row.grad_norm * row.grad_norm);
    double bound = nu * (v0 - v_star) / row.sweep;
    worst_ratio = std::max(worst_ratio, min_sq / bound);
    if (min_sq > bound) ok = false;
  }
  return report(5, ok,
                fmt("stationarity bound on square-hole inpainting (m=5, "
                    "nu=%.4g): max (min grad^2)/(nu (V0-V*)/k) = %.3g over "
                    "3000 sweeps (must stay <= 1)",
                    nu, worst_ratio));
}

// 6: fitted linear rates across resolutions m = 5,6,7: successive ratios in
// [3,5] and each within a factor 3 of the predicted rate.
bool criterion6() {
  double t0 = now_s();
  double rates[3] = {0, 0, 0}, preds[3] = {0, 0, 0};
  bool ok = true;
  for (int idx = 0; idx < 3; ++idx) {
    int m = 5 + idx;
    HoleModel hm = hole_model(m, 21);
    SolverConfig cfg;
    cfg.tau = hm.pred.tau_star;
    cfg.tol = 1e-300;
    cfg.max_sweeps = 2400 << (2 * idx);
    RunResult r = dg_run(hm.ob, hm.u0, cfg);
    double v0 = hm.ob.eval(hm.u0);
    SlopeFit fit = fit_log_slope(rel_errors(r, v0, hm.v_star), 1e-6);
    if (!fit.ok) ok = false;
    rates[idx] = fit.rate;
    preds[idx] = hm.pred.rate;
  }
  double ratio56 = rates[0] / rates[1];
  double ratio67 = rates[1] / rates[2];
  if (!(ratio56 >= 3.0 && ratio56 <= 5.0)) ok = false;
  if (!(ratio67 >= 3.0 && ratio67 <= 5.0)) ok = false;
  double worst_factor = 0.0;
  for (int idx = 0; idx < 3; ++idx) {
    double f = std::max(rates[idx] / preds[idx], preds[idx] / rates[idx]);
    worst_factor = std::max(worst_factor, f);
    if (f > kRateFitFactor) ok = false;
  }
  double dt = now_s() - t0;
  if (dt >= 600.0) ok = false;
  return report(
      6, ok,
      fmt("resolution scaling: fitted rates {%.3g, %.3g, %.3g}, ratios "
          "%.2f / %.2f (need [3,5]), worst fitted-vs-predicted factor %.1f "
          "(need <=3), %.0fs (<600s)",
          rates[0], rates[1], rates[2], ratio56, ratio67, worst_factor, dt));
}

// 7: block-parallel sweeps are bitwise reproducible across worker counts and
// match the serial block-ordered sweep.
bool criterion7() {
  struct Inst {
    const char* name;
    Objective ob;
    int n, radius, bx, by;
  };
  ObjectiveSpec tv;
  tv.reg = RegKind::tv_eps;
  tv.a = 0.5;
  tv.b = 0.0;
  tv.eps = 1e-2;
  tv.fid = FidKind::l2sq;
  ObjectiveSpec el;
  el.reg = RegKind::elastica;
  el.a = 0.9;
  el.b = 0.9;
  el.eps = 1e-4;
  el.fid = FidKind::l2sq;

  std::vector<Inst> insts;
  insts.push_back({"tv 16x16 2x2", Objective(tv, noisy_phantom(16, 0.2, 23)),
                   16, 1, 2, 2});
  insts.push_back({"tv 64x64 4x2", Objective(tv, noisy_phantom(64, 0.2, 24)),
                   64, 1, 4, 2});
  insts.push_back({"elastica 64x64 2x2",
                   Objective(el, noisy_phantom(64, 0.2, 25)), 64, 2, 2, 2});

  RootConfig root;
  bool ok = true;
  double worst = 0.0;
  for (const auto& inst : insts) {
    Partition part =
        build_partition({inst.n, inst.n}, inst.radius, inst.bx, inst.by);
    ImageGrid u0 = noisy_phantom(inst.n, 0.2, 26);

    std::vector<ImageGrid> finals;
    for (int workers : {1, 2, 4}) {
      ParallelPlan plan = make_plan(part, workers);
      ImageGrid u = u0;
      for (int k = 0; k < 3; ++k) dg_parallel_sweep(inst.ob, u, 0.38, plan, root);
      finals.push_back(u);
    }
    if (!(finals[0].v == finals[1].v && finals[1].v == finals[2].v))
      ok = false;

    ImageGrid us = u0;
    Ordering block = make_block(part);
    for (int k = 0; k < 3; ++k) dg_sweep(inst.ob, us, 0.38, block, root);
    for (size_t p = 0; p < us.v.size(); ++p) {
      double d = std::fabs(us.v[p] - finals[0].v[p]);
      worst = std::max(worst, d);
      if (d > kParallelTol) ok = false;
    }
  }
  return report(7, ok,
                fmt("parallel sweeps bitwise equal for workers {1,2,4} on 3 "
                    "instances; vs serial block order worst |diff| = %.3g "
                    "(tol 1e-12)",
                    worst));
}

// 8: adaptive steps never fall below the Wolfe floor once a decrease event
// has occurred. Starting well above the decrease threshold makes decrease
// events fire from the first sweep.
bool criterion8() {
  SeparableQuadratic quad(1, 1, 2.0);  // L = 2
  ImageGrid u0(1, 1, 1.0);
  SolverConfig cfg;
  cfg.tau = 10.0;
  cfg.tol = 1e-300;
  cfg.max_sweeps = 1200;
  cfg.adapt = AdaptParams{};  // c2 = 0.9
  RunResult r = dg_adapt_run(quad, u0, cfg);

  const double floor = (1.0 - 0.9) / (1.0 + 0.9) * (2.0 / 2.0);
  int first_decrease = -1, rows_after = 0;
  double min_tau_after = std::numeric_limits<double>::infinity();
  for (const auto& row : r.trace.rows) {
    if (first_decrease < 0 && row.has_action &&
        row.action == StepAction::decrease) {
      first_decrease = row.sweep;
    } else if (first_decrease > 0) {
      min_tau_after = std::min(min_tau_after, row.tau);
      ++rows_after;
    }
  }
  bool ok = first_decrease > 0 && rows_after >= 10 &&
            min_tau_after >= floor - kStepFloorSlack;
  return report(8, ok,
                fmt("adaptive step floor on an L=2 quadratic: first decrease "
                    "at sweep %d, %d sweeps after it, min tau afterwards "
                    "%.4f >= floor %.6f",
                    first_decrease, rows_after, min_tau_after, floor));
}

// 9: all four sweep orderings reach the same optimum at matching linear
// rates, and the randomized ordering is reproducible from its seed.
bool criterion9() {
  HoleModel hm = hole_model(5, 29);
  double v0 = hm.ob.eval(hm.u0);
  SolverConfig base;
  base.tau = hm.pred.tau_star;
  base.tol = 1e-300;
  base.max_sweeps = 20000;
  base.ordering_seed = 77;
  base.target_energy = hm.v_star + 1e-8 * (v0 - hm.v_star);

  const OrderingKind kinds[] = {OrderingKind::natural, OrderingKind::red_black,
                                OrderingKind::random, OrderingKind::block};
  double rate_lo = std::numeric_limits<double>::infinity(), rate_hi = 0.0;
  double worst_rel = 0.0;
  bool ok = true;
  RunResult random_run;
  for (OrderingKind kind : kinds) {
    SolverConfig cfg = base;
    cfg.ordering = kind;
    RunResult r = dg_run(hm.ob, hm.u0, cfg);
    std::vector<double> rel = rel_errors(r, v0, hm.v_star);
    double rel_final = (hm.ob.eval(r.u) - hm.v_star) / (v0 - hm.v_star);
    worst_rel = std::max(worst_rel, rel_final);
    if (!(rel_final < kRelOptTarget)) ok = false;
    SlopeFit fit = fit_log_slope(rel, 1e-7);
    if (!fit.ok) ok = false;
    rate_lo = std::min(rate_lo, fit.rate);
    rate_hi = std::max(rate_hi, fit.rate);
    if (kind == OrderingKind::random) random_run = std::move(r);
  }
  if (rate_hi > kSlopeSpread * rate_lo) ok = false;

  SolverConfig cfg = base;
  cfg.ordering = OrderingKind::random;
  RunResult again = dg_run(hm.ob, hm.u0, cfg);
  bool same = again.u.v == random_run.u.v &&
              again.trace.rows.size() == random_run.trace.rows.size();
  if (same)
    for (size_t k = 0; k < again.trace.rows.size(); ++k)
      if (again.trace.rows[k].energy != random_run.trace.rows[k].energy)
        same = false;
  if (!same) ok = false;

  return report(9, ok,
                fmt("ordering study at 32x32: worst relative optimality "
                    "%.3g (tol 1e-6), slope spread %.4f (need <= 2), seeded "
                    "random ordering reproducible: %s",
                    worst_rel, rate_hi / rate_lo, same ? "yes" : "no"));
}

// 10: the discrete-gradient solver reaches a shared target energy in fewer
// iterations than Armijo gradient descent on a stiff smooth instance. The
// weights are the grid-scaled equivalents of unit-spacing weights 0.9/0.9,
// so fidelity and regularizer are balanced; eps = 1e-6 makes the landscape
// stiff enough that backtracked gradient steps collapse near the optimum.
bool criterion10() {
  const int n = 64;
  const double h = 1.0 / n;
  ObjectiveSpec sp;
  sp.reg = RegKind::elastica;
  sp.a = 0.9 * h;
  sp.b = 0.9 * h * h * h;
  sp.eps = 1e-6;
  sp.fid = FidKind::l2sq;
  ImageGrid u0 = noisy_phantom(n, 0.2, 31);
  Objective ob(sp, u0);
  double v0 = ob.eval(u0);

  SolverConfig ref_cfg;
  ref_cfg.tau = 0.38;
  ref_cfg.tol = 1e-300;
  ref_cfg.max_sweeps = 600;
  RunResult ref = dg_run(ob, u0, ref_cfg);
  double v_bar = ob.eval(ref.u);
  double target = v_bar + 1e-3 * (v0 - v_bar);

  SolverConfig dg_cfg = ref_cfg;
  dg_cfg.target_energy = target;
  RunResult dg = dg_run(ob, u0, dg_cfg);

  BaselineConfig bl;
  bl.tol = 1e-300;
  bl.max_iters = 4000;
  bl.target_energy = target;
  RunResult gd = gradient_descent_run(ob, u0, bl);
  int gd_iters = gd.reason == StopReason::target_energy ? gd.sweeps : 4000;

  bool ok = dg.reason == StopReason::target_energy && dg.sweeps < gd_iters;
  return report(10, ok,
                fmt("iterations to shared target on stiff elastica (eps "
                    "1e-6): discrete gradient %d vs Armijo descent %s%d "
                    "(final energies %.4g vs %.4g)",
                    dg.sweeps,
                    gd.reason == StopReason::target_energy ? "" : ">=",
                    gd_iters, dg.energy, gd.energy));
}

}  // namespace

int main() {
  bool ok = true;
  ok &= criterion1();
  ok &= criterion2();
  ok &= criterion3();
  ok &= criterion4();
  ok &= criterion5();
  ok &= criterion6();
  ok &= criterion7();
  ok &= criterion8();
  ok &= criterion9();
  ok &= criterion10();
  std::printf("%s\n", ok ? "all criteria passed" : "CRITERIA FAILED");
  return ok ? 0 : 1;
}
