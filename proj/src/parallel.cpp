#include "dgopt/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dgopt/brent.hpp"

namespace dgopt {

namespace {

void sort_natural(std::vector<Index>& set) {
  std::sort(set.begin(), set.end(), [](Index a, Index b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

double now_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ParallelPlan make_plan(Partition part, int workers) {
  if (workers < 1) throw std::invalid_argument("plan: need workers >= 1");
  auto errs = validate_partition(part);
  if (!errs.empty())
    throw std::invalid_argument("plan: invalid partition: " + errs.front());
  for (auto& group : part.separators)
    for (auto& set : group) sort_natural(set);
  for (auto& block : part.blocks) sort_natural(block);
  return {std::move(part), workers};
}

double dg_parallel_sweep(const EnergyModel& en, ImageGrid& u, double tau,
                         const ParallelPlan& plan, const RootConfig& root,
                         PhaseTimes* times) {
  const Partition& P = plan.part;
  if (P.dims.nx != u.nx || P.dims.ny != u.ny)
    throw std::invalid_argument("parallel: partition dims differ from state");
  if (en.read_radius() > P.radius)
    throw std::invalid_argument(
        "parallel: model read radius exceeds partition radius");

  auto sweep_set = [&](const std::vector<Index>& set) {
    double dec = 0.0;
    for (const Index& p : set) {
      SolveResult r = solve_beta(en, u, p.i, p.j, tau, root);
      if (r.beta != 0.0) u.at(p.i, p.j) += r.beta;
      dec -= r.dv;
    }
    return dec;
  };

  // One concurrent stage: sets are pairwise > radius apart, so in-place
  // updates never land inside another concurrent worker's read window.
  // Per-set partials are reduced in set order for a deterministic sum.
  auto run_stage = [&](const std::vector<std::vector<Index>>& sets) {
    std::vector<double> partial(sets.size(), 0.0);
    const int W = plan.workers;
    if (W == 1 || sets.size() <= 1) {
      for (size_t s = 0; s < sets.size(); ++s) partial[s] = sweep_set(sets[s]);
    } else {
      std::exception_ptr err;
      std::mutex err_mu;
      std::vector<std::thread> pool;
      for (int w = 0; w < W; ++w)
        pool.emplace_back([&, w] {
          try {
            for (size_t s = size_t(w); s < sets.size(); s += size_t(W))
              partial[s] = sweep_set(sets[s]);
          } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!err) err = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      if (err) std::rethrow_exception(err);
    }
    double d = 0.0;
    for (double p : partial) d += p;
    return d;
  };

  auto t0 = std::chrono::steady_clock::now();
  double dec = 0.0;
  for (const auto& group : P.separators) dec += run_stage(group);
  double sep_ms = now_ms(t0);
  dec += run_stage(P.blocks);
  if (times) {
    times->separator_ms = sep_ms;
    times->block_ms = now_ms(t0) - sep_ms;
  }
  return dec;
}

RunResult dg_parallel_run(const EnergyModel& en, const ImageGrid& u0,
                          const SolverConfig& cfg, const ParallelPlan& plan) {
  bool adaptive = cfg.adapt.has_value();
  if (adaptive && !en.smooth())
    throw std::invalid_argument(
        "dg_parallel_run: adaptation needs a smooth objective");
  PhaseTimes total;
  auto sweepfn = [&en, &plan, &cfg, &total](ImageGrid& u, double tau) {
    PhaseTimes t;
    double dec = dg_parallel_sweep(en, u, tau, plan, cfg.root, &t);
    total.separator_ms += t.separator_ms;
    total.block_ms += t.block_ms;
    return dec;
  };
  RunResult res = run_sweeps(en, u0, cfg, sweepfn, adaptive,
                             {{"solver", "dg_parallel"},
                              {"workers", std::to_string(plan.workers)}});
  res.trace.set_meta("separator_ms", fmt(total.separator_ms));
  res.trace.set_meta("block_ms", fmt(total.block_ms));
  return res;
}

}  // namespace dgopt
