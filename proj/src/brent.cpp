#include "dgopt/brent.hpp"

#include <algorithm>
#include <cmath>

namespace dgopt {

SolveResult solve_beta(const EnergyModel& en, const ImageGrid& u, int i, int j,
                       double tau, const RootConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("solve_beta: need tau > 0");
  CoordScratch s;
  en.coord_begin(u, i, j, s);

  const double fd = 1e-8;
  const double d_est =
      (en.coord_delta(s, fd) - en.coord_delta(s, -fd)) / (2.0 * fd);
  if (std::abs(d_est) < 1e-14) return {0.0, 0.0, SolveStatus::flat};

  auto dv = [&](double beta) { return en.coord_delta(s, beta); };
  const double g0 = tau * d_est;
  auto g = [&](double beta) {
    if (beta == 0.0) return g0;
    return beta + tau * dv(beta) / beta;
  };

  // Geometric expansion from the Euler seed, on the descent side, until g
  // flips sign against g(0).
  const double seed = -tau * d_est;
  double b = seed;
  bool bracketed = false;
  for (int k = 0; k < cfg.max_expansions; ++k) {
    if ((g(b) > 0.0) != (g0 > 0.0)) {
      bracketed = true;
      break;
    }
    b *= cfg.bracket_expansion;
  }

  auto euler_fallback = [&]() -> SolveResult {
    double de = dv(seed);
    if (de <= 0.0) return {seed, de, SolveStatus::euler_fallback};
    return {0.0, 0.0, SolveStatus::rejected};
  };

  if (!bracketed) return euler_fallback();

  BrentResult r = brent_root(g, std::min(0.0, b), std::max(0.0, b), cfg);
  double d_at_root = dv(r.root);
  if (d_at_root <= 0.0) return {r.root, d_at_root, SolveStatus::root};
  return euler_fallback();
}

}  // namespace dgopt
