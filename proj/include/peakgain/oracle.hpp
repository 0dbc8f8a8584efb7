#pragma once

// Independent ground truth: exact l1-norm computation by adaptive quadrature
// of |h(t)| with a certified tail bound, plus the worst-case bang-bang
// trajectory lower bound.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "peakgain/linalg.hpp"
#include "peakgain/model.hpp"
#include "peakgain/starnorm.hpp"

namespace peakgain {

// Impulse response h(t) = C e^{At} B.
inline double impulse(const LtiSystem& sys, double t) {
  if (t < 0.0) throw std::invalid_argument("impulse: t must be >= 0");
  return (sys.c * expm(sys.a * t) * sys.b)(0, 0);
}

namespace detail {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

inline void adaptive_simpson(const std::function<double(double)>& f, double a,
                             double b, double fa, double fm, double fb,
                             double whole, double tol, int depth,
                             QuadratureResult& acc) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    acc.value += left + right + delta / 15.0;
    acc.error += std::abs(delta) / 15.0;
    return;
  }
  adaptive_simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1, acc);
  adaptive_simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1, acc);
}

inline QuadratureResult integrate(const std::function<double(double)>& f,
                                  double a, double b, double tol) {
  QuadratureResult acc;
  if (b <= a) return acc;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48, acc);
  return acc;
}

// Locate sign changes of h on [a, b] by dense sampling plus bisection; the
// integrand |h| has kinks there, so each smooth piece is integrated alone.
inline std::vector<double> impulse_sign_changes(const LtiSystem& sys, double a,
                                                double b) {
  std::vector<double> roots;
  const std::size_t samples = 1024;
  double prev_t = a;
  double prev_h = impulse(sys, a);
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = a + (b - a) * double(i) / double(samples);
    const double h = impulse(sys, t);
    if ((prev_h < 0.0 && h > 0.0) || (prev_h > 0.0 && h < 0.0)) {
      double lo = prev_t, hi = t, flo = prev_h;
      for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = impulse(sys, mid);
        if ((flo < 0.0) == (fm < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
        if (hi - lo <= 1e-14 * (b - a)) break;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_h = h;
  }
  return roots;
}

}  // namespace detail

// Adaptive Simpson quadrature of |h| on [a, b] with pre-splitting at the
// sampled sign changes of h (absolute tolerance).
inline detail::QuadratureResult integrate_abs_impulse(const LtiSystem& sys,
                                                      double a, double b,
                                                      double abs_tol) {
  const std::vector<double> roots = detail::impulse_sign_changes(sys, a, b);
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double r : roots) cuts.push_back(r);
  cuts.push_back(b);
  detail::QuadratureResult total;
  const double piece_tol = abs_tol / double(cuts.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto f = [&sys](double t) { return std::abs(impulse(sys, t)); };
    const detail::QuadratureResult piece =
        detail::integrate(f, cuts[k], cuts[k + 1], piece_tol);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

struct L1Estimate {
  double value = 0.0;             // integral of |h| over [0, truncation_time]
  double truncation_time = 0.0;
  double tail_bound = 0.0;        // certified bound on the remaining tail
  double quadrature_error = 0.0;
};

namespace detail {

// Certified tail bound: the l1 norm of the system restarted at time T equals
// the tail integral, and its degree-1 star norm bounds it from above. The
// star norm scales exactly linearly in B, so the shifted input matrix is
// normalized before sweeping to keep the SDPs well-scaled.
inline double certified_tail_bound(const LtiSystem& sys, double t) {
  const Matrix bt = expm(sys.a * t) * sys.b;
  const double scale = bt.norm_fro();
  if (scale == 0.0 || !std::isfinite(scale)) return 0.0;
  const LtiSystem shifted =
      make_system(sys.a, bt * (1.0 / scale), sys.c, sys.name);
  return scale * sweep(shifted, 1).star_norm;
}

}  // namespace detail

inline L1Estimate l1_exact(const LtiSystem& sys, double tolerance = 1e-6) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("l1_exact: tolerance must be positive");
  }
  double t = 10.0 / std::abs(sys.max_real_eigenvalue);
  // Rough value for the relative budgets.
  double rough = integrate_abs_impulse(sys, 0.0, t, 1e-4).value;
  rough = std::max(rough, std::numeric_limits<double>::min());

  double tail = detail::certified_tail_bound(sys, t);
  double prev_tail = std::numeric_limits<double>::infinity();
  int doublings = 0;
  while (tail >= 0.5 * tolerance * rough) {
    if (++doublings > 60 || !(tail < 0.9 * prev_tail)) {
      throw std::runtime_error(
          "l1_exact: tail bound fails to shrink (tail=" +
          std::to_string(tail) + " at T=" + std::to_string(t) + ")");
    }
    prev_tail = tail;
    t *= 2.0;
    tail = detail::certified_tail_bound(sys, t);
  }

  const detail::QuadratureResult head =
      integrate_abs_impulse(sys, 0.0, t, 0.5 * tolerance * rough);
  L1Estimate est;
  est.value = head.value;
  est.truncation_time = t;
  est.tail_bound = tail;
  est.quadrature_error = head.error;
  return est;
}

struct TrajectorySample {
  double t;
  std::vector<double> x;
  double u;
  double y;
};

struct WorstCaseRun {
  Matrix p;  // matrix used inside the switching law
  double dt = 0.0;
  double horizon = 0.0;
  std::vector<TrajectorySample> trajectory;
  double peak_output = 0.0;
  double peak_time = 0.0;
};

// Tie rule for the bang-bang law: sign(0) resolves to +1 so the trajectory
// deterministically departs the origin.
inline double bang_bang_sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

// One classical Runge-Kutta step of xdot = A x + B u with u held constant.
inline void rk4_step(const LtiSystem& sys, std::vector<double>& x, double u,
                     double dt) {
  const std::size_t n = sys.n;
  auto deriv = [&](const std::vector<double>& s, std::vector<double>& d) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = sys.b(i, 0) * u;
      for (std::size_t j = 0; j < n; ++j) v += sys.a(i, j) * s[j];
      d[i] = v;
    }
  };
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  deriv(x, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  deriv(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  deriv(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  deriv(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

// Integrates the bang-bang run with u = sign(x' p B) held constant over each
// step (sample-and-hold), starting from the origin.
inline WorstCaseRun worst_case(const LtiSystem& sys, const Matrix& p,
                               double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon > 0.0)) {
    throw std::invalid_argument("worst_case: dt and horizon must be positive");
  }
  if (p.rows() != sys.n || p.cols() != sys.n) {
    throw std::invalid_argument("worst_case: p has wrong dimensions");
  }
  if (!cholesky(p).success) {
    throw std::invalid_argument(
        "worst_case: p must be symmetric positive definite");
  }
  const Matrix pb = p * sys.b;
  WorstCaseRun run;
  run.p = p;
  run.dt = dt;
  run.horizon = horizon;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(horizon / dt));
  run.trajectory.reserve(steps + 1);
  std::vector<double> x(sys.n, 0.0);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = double(k) * dt;
    double xpb = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) xpb += x[i] * pb(i, 0);
    const double u = bang_bang_sign(xpb);
    double y = 0.0;
    for (std::size_t i = 0; i < sys.n; ++i) y += sys.c(0, i) * x[i];
    run.trajectory.push_back({t, x, u, y});
    if (std::abs(y) > run.peak_output) {
      run.peak_output = std::abs(y);
      run.peak_time = t;
    }
    if (k < steps) rk4_step(sys, x, u, dt);
  }
  return run;
}

// Default matrix for the switching law: the shape matrix (inverse) of the
// optimal degree-1 inescapable ellipsoid. This is the convention under which
// the run attains the documented lower bounds.
inline Matrix worst_case_default_shape(const LtiSystem& sys) {
  const SweepResult d1 = sweep(sys, 1);
  return symmetrize(solve_spd(d1.best.p, Matrix::identity(sys.n)));
}

inline double default_horizon(const LtiSystem& sys) {
  return 10.0 / std::abs(sys.max_real_eigenvalue);
}

}  // namespace peakgain
