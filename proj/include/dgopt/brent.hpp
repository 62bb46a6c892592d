#pragma once

#include <cmath>
#include <stdexcept>

#include "dgopt/energy.hpp"

namespace dgopt {

struct RootConfig {
  double abs_tol = 1e-10;
  int max_iterations = 100;
  double bracket_expansion = 2.0;
  int max_expansions = 60;
};

enum class BrentStatus { converged, max_iterations, no_bracket };

struct BrentResult {
  double root = 0.0;
  double f_root = 0.0;
  int iterations = 0;
  BrentStatus status = BrentStatus::converged;
};

// Brent–Dekker: bisection / secant / inverse quadratic, never leaves the
// initial bracket. Requires f(lo)*f(hi) <= 0; on iteration-cap exhaustion
// returns the best current endpoint with a flagged status.
template <typename F>
BrentResult brent_root(F&& f, double lo, double hi, const RootConfig& cfg) {
  if (!(lo < hi)) throw std::invalid_argument("brent: need lo < hi");
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  BrentResult res;
  if (fa == 0.0) {
    res.root = a;
    return res;
  }
  if (fb == 0.0) {
    res.root = b;
    return res;
  }
  if ((fa > 0.0) == (fb > 0.0)) {
    res.status = BrentStatus::no_bracket;
    res.root = 0.5 * (a + b);
    res.f_root = f(res.root);
    return res;
  }
  double c = a, fc = fa;  // c: previous iterate, [b,c] always brackets
  double d = b - a, e = d;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    res.iterations = it + 1;
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    double tol1 = 0.5 * cfg.abs_tol + 2.0 * 2.220446049250313e-16 * std::abs(b);
    double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      res.root = b;
      res.f_root = fb;
      return res;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  res.root = b;
  res.f_root = fb;
  res.status = BrentStatus::max_iterations;
  return res;
}

enum class SolveStatus { root, flat, euler_fallback, rejected };

struct SolveResult {
  double beta = 0.0;
  double dv = 0.0;  // realized local energy change at the returned beta
  SolveStatus status = SolveStatus::flat;
};

// Solves the implicit coordinate equation g(beta) = beta + tau*dV(beta)/beta
// = 0 (continuously extended at 0 by a symmetric-difference slope estimate),
// then re-checks dissipation at the accepted beta. Fallback ladder:
// root -> explicit Euler step -> 0, each gated on dV <= 0.
SolveResult solve_beta(const EnergyModel& en, const ImageGrid& u, int i, int j,
                       double tau, const RootConfig& cfg);

}  // namespace dgopt
