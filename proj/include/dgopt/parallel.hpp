#pragma once

#include "dgopt/partition.hpp"
#include "dgopt/solver.hpp"

namespace dgopt {

struct ParallelPlan {
  Partition part;
  int workers = 1;
};

// Validates the partition and worker count.
ParallelPlan make_plan(Partition part, int workers);

struct PhaseTimes {
  double separator_ms = 0.0;
  double block_ms = 0.0;
};

// Two-stage sweep: separator groups first (sets within a group concurrent),
// then all blocks concurrent. Workers update the shared state in place;
// every read outside a worker's own set lands on pixels no concurrent set
// touches, because sets are > part.radius apart and the model reads at most
// read_radius() <= part.radius away. The result is bitwise identical to the
// serial block-ordered sweep and independent of the worker count; per-set
// decrements are reduced in set order so even the sum is deterministic.
// Throws if read_radius() exceeds part.radius.
double dg_parallel_sweep(const EnergyModel& en, ImageGrid& u, double tau,
                         const ParallelPlan& plan, const RootConfig& root,
                         PhaseTimes* times = nullptr);

// Run loop over dg_parallel_sweep; honors cfg.adapt like dg_adapt_run.
// Trace metadata records the worker count and per-phase wall time.
RunResult dg_parallel_run(const EnergyModel& en, const ImageGrid& u0,
                          const SolverConfig& cfg, const ParallelPlan& plan);

}  // namespace dgopt
