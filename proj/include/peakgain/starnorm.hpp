#pragma once

// Inescapability SDPs for degrees 1 and 2, the alpha sweep, and the star
// norm H* (the least upper bound on the l1 norm over inescapable
// ellipsoids).

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "peakgain/linalg.hpp"
#include "peakgain/model.hpp"
#include "peakgain/sdp.hpp"

namespace peakgain {

// Strict-positivity shift for P in both SDPs.
inline constexpr double kEllipsoidEps = 1e-8;

inline double kappa(const LtiSystem& sys) {
  return -2.0 * sys.max_real_eigenvalue;
}

inline double kappa(const LiftedSystem& lifted) {
  return -2.0 * eigenvalues(lifted.a_lift).max_real_part;
}

namespace detail {

// Scalar layout for a symmetric m x m variable: upper triangle, row-major.
inline std::size_t sym_count(std::size_t m) { return m * (m + 1) / 2; }

// Basis matrix for entry (i, j) of a symmetric variable.
inline Matrix sym_unit(std::size_t i, std::size_t j, std::size_t m) {
  Matrix e = Matrix::zeros(m, m);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

inline Matrix extract_sym(const std::vector<double>& y, std::size_t m,
                          std::size_t offset = 0) {
  Matrix p(m, m);
  std::size_t k = offset;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      p(i, j) = y[k];
      p(j, i) = y[k];
      ++k;
    }
  }
  return p;
}

}  // namespace detail

// minimize t  s.t.  -[[A'P + PA + aP, PB], [B'P, -aI]] PSD,
//                   P - eps I PSD,  [[P, C'], [C, t]] PSD.
inline SdpProblem build_sdp_d1(const LtiSystem& sys, double alpha) {
  const double k = kappa(sys);
  if (!(alpha > 0.0) || !(alpha < k)) {
    throw std::invalid_argument("build_sdp_d1: alpha must lie in (0, " +
                                std::to_string(k) + ")");
  }
  const std::size_t n = sys.n;
  const std::size_t np = detail::sym_count(n);
  SdpProblem prob;
  prob.num_scalars = np + 1;
  prob.objective.assign(prob.num_scalars, 0.0);
  prob.objective[np] = 1.0;  // minimize t

  SdpBlock lmi;
  lmi.size = n + 1;
  lmi.f0 = Matrix::zeros(n + 1, n + 1);
  lmi.f0(n, n) = alpha;

  SdpBlock pos;
  pos.size = n;
  pos.f0 = Matrix::identity(n) * (-kEllipsoidEps);

  SdpBlock epi;
  epi.size = n + 1;
  epi.f0 = Matrix::zeros(n + 1, n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    epi.f0(n, j) = sys.c(0, j);
    epi.f0(j, n) = sys.c(0, j);
  }

  std::size_t scalar = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++scalar) {
      const Matrix e = detail::sym_unit(i, j, n);
      const Matrix tl = sys.a.transpose() * e + e * sys.a + e * alpha;
      const Matrix eb = e * sys.b;
      Matrix coeff = Matrix::zeros(n + 1, n + 1);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t cidx = 0; cidx < n; ++cidx) {
          coeff(r, cidx) = -tl(r, cidx);
        }
        coeff(r, n) = -eb(r, 0);
        coeff(n, r) = -eb(r, 0);
      }
      lmi.terms.push_back({scalar, coeff});
      pos.terms.push_back({scalar, e});
      Matrix epi_coeff = Matrix::zeros(n + 1, n + 1);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t cidx = 0; cidx < n; ++cidx)
          epi_coeff(r, cidx) = e(r, cidx);
      epi.terms.push_back({scalar, epi_coeff});
    }
  }
  Matrix t_coeff = Matrix::zeros(n + 1, n + 1);
  t_coeff(n, n) = 1.0;
  epi.terms.push_back({np, t_coeff});

  prob.blocks = {lmi, pos, epi};
  return prob;
}

// Degree-2 inescapability SDP over the full lifted state. The block matrix
//
//   M = [ P A2 + A2' P + a P ,  P B2 + sum_j g_j E_j ,  z(beta) ]
//       [        (sym)       ,      -diag(beta)      ,    0     ]
//       [       z(beta)'     ,          0'            ,   -a    ]
//
// must be negative semidefinite, where z carries beta_i / 2 at the squared
// lifted coordinates. Scalar order: P (upper triangle), beta, gamma, t.
inline SdpProblem build_sdp_d2(const LiftedSystem& lifted,
                               const SProcedureStructure& structure,
                               double alpha) {
  const double k = kappa(lifted);
  if (!(alpha > 0.0) || !(alpha < k)) {
    throw std::invalid_argument("build_sdp_d2: alpha must lie in (0, " +
                                std::to_string(k) + ")");
  }
  const std::size_t n = lifted.base_dim;
  const std::size_t nn = n * n;
  const std::size_t np = detail::sym_count(nn);
  const std::size_t nbeta = structure.inequality_indices.size();
  const std::size_t ngamma = structure.equality_matrices.size();
  const std::size_t t_index = np + nbeta + ngamma;

  SdpProblem prob;
  prob.num_scalars = t_index + 1;
  prob.objective.assign(prob.num_scalars, 0.0);
  prob.objective[t_index] = 1.0;
  for (std::size_t i = 0; i < nbeta; ++i) prob.sign_constraints.push_back(np + i);

  const std::size_t msize = nn + n + 1;  // zeta block + w block + 1
  const std::size_t last = msize - 1;

  SdpBlock lmi;  // -M PSD
  lmi.size = msize;
  lmi.f0 = Matrix::zeros(msize, msize);
  lmi.f0(last, last) = alpha;

  SdpBlock pos;  // P - eps I PSD
  pos.size = nn;
  pos.f0 = Matrix::identity(nn) * (-kEllipsoidEps);

  SdpBlock epi;  // [[P, C2'], [C2, t]] PSD
  epi.size = nn + 1;
  epi.f0 = Matrix::zeros(nn + 1, nn + 1);
  for (std::size_t j = 0; j < nn; ++j) {
    epi.f0(nn, j) = lifted.c_lift(0, j);
    epi.f0(j, nn) = lifted.c_lift(0, j);
  }

  std::size_t scalar = 0;
  for (std::size_t i = 0; i < nn; ++i) {
    for (std::size_t j = i; j < nn; ++j, ++scalar) {
      const Matrix e = detail::sym_unit(i, j, nn);
      const Matrix tl =
          e * lifted.a_lift + lifted.a_lift.transpose() * e + e * alpha;
      const Matrix eb = e * lifted.b_lift;  // nn x n
      Matrix coeff = Matrix::zeros(msize, msize);
      for (std::size_t r = 0; r < nn; ++r) {
        for (std::size_t cidx = 0; cidx < nn; ++cidx)
          coeff(r, cidx) = -tl(r, cidx);
        for (std::size_t cidx = 0; cidx < n; ++cidx) {
          coeff(r, nn + cidx) = -eb(r, cidx);
          coeff(nn + cidx, r) = -eb(r, cidx);
        }
      }
      lmi.terms.push_back({scalar, coeff});
      pos.terms.push_back({scalar, e});
      Matrix epi_coeff = Matrix::zeros(nn + 1, nn + 1);
      for (std::size_t r = 0; r < nn; ++r)
        for (std::size_t cidx = 0; cidx < nn; ++cidx)
          epi_coeff(r, cidx) = e(r, cidx);
      epi.terms.push_back({scalar, epi_coeff});
    }
  }

  for (std::size_t i = 0; i < nbeta; ++i) {
    Matrix coeff = Matrix::zeros(msize, msize);
    coeff(nn + i, nn + i) = 1.0;  // -(-beta_i) on the w-block diagonal
    const std::size_t zrow = structure.inequality_indices[i] - 1;
    coeff(zrow, last) = -0.5;
    coeff(last, zrow) = -0.5;
    lmi.terms.push_back({np + i, coeff});
  }

  for (std::size_t j = 0; j < ngamma; ++j) {
    const Matrix& e = structure.equality_matrices[j];
    Matrix coeff = Matrix::zeros(msize, msize);
    for (std::size_t r = 0; r < nn; ++r) {
      for (std::size_t cidx = 0; cidx < n; ++cidx) {
        if (e(r, cidx) != 0.0) {
          coeff(r, nn + cidx) = -e(r, cidx);
          coeff(nn + cidx, r) = -e(r, cidx);
        }
      }
    }
    lmi.terms.push_back({np + nbeta + j, coeff});
  }

  Matrix t_coeff = Matrix::zeros(nn + 1, nn + 1);
  t_coeff(nn, nn) = 1.0;
  epi.terms.push_back({t_index, t_coeff});

  prob.blocks = {lmi, pos, epi};
  return prob;
}

struct SweepPoint {
  double alpha = 0.0;
  bool feasible = false;
  Matrix p;                 // optimal ellipsoid matrix when feasible
  double n_alpha = std::numeric_limits<double>::infinity();
  SdpStatus solver_status = SdpStatus::max_iterations;
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double kappa = 0.0;
  SweepPoint best;
  double star_norm = std::numeric_limits<double>::infinity();
  int degree = 1;
};

namespace detail {

// A returned iterate is accepted only if it independently verifies: every
// block of the original problem nonnegative to -1e-7 and P invertible. The
// bound N_alpha is always recomputed from P itself, never read off the
// epigraph variable, so accepted points certify valid bounds even when the
// solver stopped short of full accuracy.
inline SweepPoint evaluate_point(const SdpProblem& prob, double alpha,
                                 const Matrix& cmat, std::size_t pdim) {
  SweepPoint pt;
  pt.alpha = alpha;
  SdpSolution sol;
  try {
    sol = solve(prob);
  } catch (const std::exception&) {
    pt.solver_status = SdpStatus::max_iterations;
    return pt;
  }
  pt.solver_status = sol.status;
  pt.duality_gap = sol.duality_gap;
  if (sol.status == SdpStatus::infeasible ||
      sol.status == SdpStatus::unbounded) {
    return pt;
  }
  const FeasibilityReport rep = check_feasibility(prob, sol.y);
  for (double e : rep.min_eigenvalue_per_block) {
    if (e < -1e-7) return pt;
  }
  for (double v : rep.sign_violations) {
    if (v > 1e-9) return pt;
  }
  Matrix p = detail::extract_sym(sol.y, pdim);
  try {
    const Matrix x = solve_spd(p, cmat.transpose());
    const double n2 = (cmat * x)(0, 0);
    if (!(n2 >= 0.0) || !std::isfinite(n2)) return pt;
    pt.p = p;
    pt.n_alpha = std::sqrt(n2);
    pt.feasible = true;
  } catch (const NotPositiveDefinite&) {
    return pt;
  }
  return pt;
}

}  // namespace detail

// Evaluates N_alpha on a logarithmic grid over (0.01 kappa, 0.99 kappa) and
// refines around the grid minimizer with golden-section steps. For degree 2
// the reported star norm is the square root of the lifted infimum, mapping
// the bound on the squared output back to the original system.
inline SweepResult sweep(const LtiSystem& sys, int degree,
                         std::size_t grid_points = 64,
                         std::size_t refine_iterations = 40) {
  if (degree != 1 && degree != 2) {
    throw std::invalid_argument("sweep: degree must be 1 or 2");
  }
  if (grid_points < 8) {
    throw std::invalid_argument("sweep: grid_points must be >= 8");
  }
  if (degree == 2 && sys.n < 2) {
    throw std::invalid_argument("sweep: degree 2 requires n >= 2");
  }

  SweepResult result;
  result.degree = degree;

  LiftedSystem lifted;
  SProcedureStructure structure;
  Matrix cmat = sys.c;
  std::size_t pdim = sys.n;
  if (degree == 2) {
    lifted = lift(sys);
    structure = sprocedure_structure(sys.n);
    cmat = lifted.c_lift;
    pdim = sys.n * sys.n;
    result.kappa = kappa(lifted);
  } else {
    result.kappa = kappa(sys);
  }

  auto evaluate = [&](double alpha) -> SweepPoint {
    SdpProblem prob = (degree == 2)
                          ? build_sdp_d2(lifted, structure, alpha)
                          : build_sdp_d1(sys, alpha);
    SweepPoint pt = detail::evaluate_point(prob, alpha, cmat, pdim);
    result.points.push_back(pt);
    return pt;
  };

  const double lo = 0.01 * result.kappa;
  const double hi = 0.99 * result.kappa;
  const double llo = std::log(lo), lhi = std::log(hi);
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = std::exp(llo + (lhi - llo) * double(i) / double(grid_points - 1));
  }

  SweepPoint best;
  std::size_t best_idx = grid_points;
  for (std::size_t i = 0; i < grid_points; ++i) {
    SweepPoint pt = evaluate(grid[i]);
    if (pt.feasible && pt.n_alpha < best.n_alpha) {
      best = pt;
      best_idx = i;
    }
  }
  if (best_idx == grid_points) {
    std::string statuses;
    for (const SweepPoint& pt : result.points) {
      statuses += std::string(" ") + to_string(pt.solver_status);
    }
    throw std::runtime_error(
        "sweep: every grid point infeasible (kappa=" +
        std::to_string(result.kappa) + "; statuses:" + statuses +
        "); this indicates a solver or model defect");
  }

  // Golden-section refinement between the neighbours of the grid minimizer.
  double a = grid[best_idx > 0 ? best_idx - 1 : 0];
  double b = grid[std::min(best_idx + 1, grid_points - 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  SweepPoint f1 = evaluate(x1);
  SweepPoint f2 = evaluate(x2);
  if (f1.feasible && f1.n_alpha < best.n_alpha) best = f1;
  if (f2.feasible && f2.n_alpha < best.n_alpha) best = f2;
  for (std::size_t it = 2; it < refine_iterations; ++it) {
    const double v1 = f1.feasible ? f1.n_alpha
                                  : std::numeric_limits<double>::infinity();
    const double v2 = f2.feasible ? f2.n_alpha
                                  : std::numeric_limits<double>::infinity();
    if (v1 <= v2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = evaluate(x1);
      if (f1.feasible && f1.n_alpha < best.n_alpha) best = f1;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = evaluate(x2);
      if (f2.feasible && f2.n_alpha < best.n_alpha) best = f2;
    }
  }

  result.best = best;
  result.star_norm =
      (degree == 2) ? std::sqrt(best.n_alpha) : best.n_alpha;
  return result;
}

// Boundary of the certified set in the original (planar) state space.
// Degree 1: radius (v' P v)^{-1/2}; degree 2: ((v(x)v)' P (v(x)v))^{-1/4}.
inline std::vector<std::array<double, 3>> ellipsoid_boundary(
    const SweepPoint& point, int degree, std::size_t directions) {
  if (!point.feasible) {
    throw std::invalid_argument("ellipsoid_boundary: point is not feasible");
  }
  const std::size_t expected = (degree == 2) ? 4 : 2;
  if (degree != 1 && degree != 2) {
    throw std::invalid_argument("ellipsoid_boundary: degree must be 1 or 2");
  }
  if (point.p.rows() != expected) {
    throw std::invalid_argument(
        "ellipsoid_boundary: boundary export is only supported for planar "
        "state spaces (n = 2)");
  }
  std::vector<std::array<double, 3>> rows;
  rows.reserve(directions);
  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t k = 0; k < directions; ++k) {
    const double theta = two_pi * double(k) / double(directions);
    const Matrix v = Matrix::column({std::cos(theta), std::sin(theta)});
    double r;
    if (degree == 1) {
      const double q = (v.transpose() * point.p * v)(0, 0);
      r = 1.0 / std::sqrt(q);
    } else {
      const Matrix vv = kron(v, v);
      const double q = (vv.transpose() * point.p * vv)(0, 0);
      r = 1.0 / std::sqrt(std::sqrt(q));
    }
    rows.push_back({theta, r * v(0, 0), r * v(1, 0)});
  }
  return rows;
}

}  // namespace peakgain
