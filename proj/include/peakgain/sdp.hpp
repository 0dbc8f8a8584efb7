#pragma once

// Dense semidefinite programming in linear-matrix-inequality form:
//
//   minimize  objective . y
//   s.t.      F0_k + sum_i y_i F_{i,k}  is PSD   for every block k
//             y_j >= 0                           for j in sign_constraints
//
// solved by an infeasible-start primal-dual interior-point method with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector. All blocks are
// tiny (size <= 9), so every factorization is dense.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "peakgain/linalg.hpp"

namespace peakgain {

struct SdpTerm {
  std::size_t scalar;  // index of the scalar variable this matrix multiplies
  Matrix coefficient;  // symmetric, same size as the owning block
};

struct SdpBlock {
  std::size_t size = 0;
  Matrix f0;
  std::vector<SdpTerm> terms;
};

struct SdpProblem {
  std::size_t num_scalars = 0;
  std::vector<double> objective;           // minimized
  std::vector<SdpBlock> blocks;
  std::vector<std::size_t> sign_constraints;  // scalar indices forced >= 0
};

enum class SdpStatus { optimal, infeasible, unbounded, max_iterations };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

struct SdpSolution {
  std::vector<double> y;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  // Relative duality gap <S,Z>/(1 + |primal| + |dual|), the quantity the
  // convergence tolerance applies to.
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  SdpStatus status = SdpStatus::max_iterations;
  std::size_t iterations = 0;
  std::string message;
};

struct FeasibilityReport {
  std::vector<double> min_eigenvalue_per_block;
  std::vector<double> sign_violations;  // max(0, -y_j) per sign constraint
};

inline FeasibilityReport check_feasibility(const SdpProblem& problem,
                                           const std::vector<double>& y) {
  if (y.size() != problem.num_scalars) {
    throw std::invalid_argument("check_feasibility: y has wrong length");
  }
  FeasibilityReport report;
  for (const SdpBlock& blk : problem.blocks) {
    Matrix s = blk.f0;
    for (const SdpTerm& term : blk.terms) {
      if (y[term.scalar] != 0.0) s += term.coefficient * y[term.scalar];
    }
    report.min_eigenvalue_per_block.push_back(min_eigenvalue(s));
  }
  for (std::size_t j : problem.sign_constraints) {
    report.sign_violations.push_back(std::max(0.0, -y[j]));
  }
  return report;
}

namespace detail {

// Work representation: sign constraints become extra 1x1 blocks so the core
// iteration only ever sees PSD blocks.
struct WorkBlock {
  std::size_t size = 0;
  Matrix f0;
  std::vector<SdpTerm> terms;
  Matrix s, z;          // current primal slack / dual iterates
  Matrix w, winv, g;    // NT scaling, its inverse, chol factor of w
  Matrix v;             // scaled point, V = G^-1 S G^-T = G^T Z G
  SymmetricEig veig;    // eigendecomposition of v
  Matrix r;             // LMI residual F(y) - S
  Matrix ds, dz;        // current search direction
};

inline Matrix eval_lmi(const WorkBlock& blk, const std::vector<double>& y) {
  Matrix s = blk.f0;
  for (const SdpTerm& term : blk.terms) {
    if (y[term.scalar] != 0.0) s += term.coefficient * y[term.scalar];
  }
  return s;
}

// Largest step a with X + a*D staying PSD (X is PD with chol factor l).
inline double max_psd_step(const Matrix& l, const Matrix& d) {
  Matrix m = forward_substitute(l, d);
  m = forward_substitute(l, m.transpose());
  const double lam_min = sym_eig(symmetrize(m)).values.front();
  if (lam_min >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam_min;
}

// Solve 0.5 (V X + X V) = Rc for symmetric X using the eigendecomposition
// of the (positive definite) scaled point V.
inline Matrix lyap_solve(const SymmetricEig& veig, const Matrix& rc) {
  const std::size_t m = rc.rows();
  const Matrix& q = veig.vectors;
  Matrix t = q.transpose() * rc * q;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      t(i, j) *= 2.0 / (veig.values[i] + veig.values[j]);
  return q * t * q.transpose();
}

// NT scaling point: W with W Z W = S, computed from the Cholesky factor of
// the "outer" matrix. With M = L^T inner L, returns L M^{-1/2} L^T.
inline Matrix nt_scaling(const Matrix& outer_chol_l, const Matrix& inner) {
  const Matrix m =
      symmetrize(outer_chol_l.transpose() * inner * outer_chol_l);
  const SymmetricEig eig = sym_eig(m);
  const std::size_t k = m.rows();
  Matrix mhalf_inv = Matrix::zeros(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    if (eig.values[c] <= 0.0) {
      throw NotPositiveDefinite(c + 1);
    }
    const double scale = 1.0 / std::sqrt(eig.values[c]);
    for (std::size_t r2 = 0; r2 < k; ++r2)
      mhalf_inv(r2, c) = eig.vectors(r2, c) * scale;
  }
  // mhalf_inv now holds Q diag(lambda^{-1/2}); finish Q diag Q^T sandwich.
  Matrix msqrtinv = mhalf_inv * eig.vectors.transpose();
  return symmetrize(outer_chol_l * msqrtinv * outer_chol_l.transpose());
}

}  // namespace detail

inline SdpSolution solve(const SdpProblem& problem, double tolerance = 1e-8,
                         std::size_t max_iterations = 200) {
  using detail::WorkBlock;
  if (tolerance <= 0.0) {
    throw std::invalid_argument("solve: tolerance must be positive");
  }
  const std::size_t nvar = problem.num_scalars;
  if (problem.objective.size() != nvar) {
    throw std::invalid_argument("solve: objective length mismatch");
  }
  for (const SdpBlock& b : problem.blocks) {
    if (b.f0.rows() != b.size || b.f0.cols() != b.size) {
      throw std::invalid_argument("solve: block constant has wrong size");
    }
    for (const SdpTerm& t : b.terms) {
      if (t.scalar >= nvar) {
        throw std::invalid_argument("solve: term references unknown scalar");
      }
      const Matrix& f = t.coefficient;
      if (f.rows() != b.size || f.cols() != b.size) {
        throw std::invalid_argument(
            "solve: coefficient size does not match its block");
      }
      if ((f - f.transpose()).max_abs() > 1e-12 * (1.0 + f.max_abs())) {
        throw std::invalid_argument("solve: coefficient is not symmetric");
      }
    }
  }
  for (std::size_t j : problem.sign_constraints) {
    if (j >= nvar) {
      throw std::invalid_argument("solve: sign constraint on unknown scalar");
    }
  }

  std::vector<WorkBlock> blocks;
  blocks.reserve(problem.blocks.size() + problem.sign_constraints.size());
  for (const SdpBlock& b : problem.blocks) {
    WorkBlock wb;
    wb.size = b.size;
    wb.f0 = symmetrize(b.f0);
    wb.terms = b.terms;
    for (SdpTerm& t : wb.terms) t.coefficient = symmetrize(t.coefficient);
    blocks.push_back(std::move(wb));
  }
  for (std::size_t j : problem.sign_constraints) {
    WorkBlock wb;
    wb.size = 1;
    wb.f0 = Matrix::zeros(1, 1);
    wb.terms.push_back({j, Matrix::identity(1)});
    blocks.push_back(std::move(wb));
  }

  double total_dim = 0.0;
  for (const WorkBlock& b : blocks) total_dim += double(b.size);

  // Infeasible start: scaled identity for matrix blocks, 1 for scalars.
  std::vector<double> y(nvar, 0.0);
  for (WorkBlock& b : blocks) {
    const double xi =
        (b.size == 1) ? 1.0 : std::max(1.0, b.f0.norm_fro());
    b.s = Matrix::identity(b.size) * xi;
    b.z = Matrix::identity(b.size);
  }

  const std::vector<double>& c = problem.objective;
  double cscale = 1.0;
  for (double v : c) cscale = std::max(cscale, std::abs(v));

  SdpSolution best;
  best.y = y;
  double best_score = std::numeric_limits<double>::infinity();
  double initial_znorm = 0.0;
  for (const WorkBlock& b : blocks) initial_znorm += b.z.norm_fro();

  std::size_t stalled = 0;
  double prev_score = std::numeric_limits<double>::infinity();
  bool schur_regularized = false;

  auto finish = [&](SdpStatus status, std::size_t iter,
                    const std::string& msg) {
    SdpSolution out = best;
    out.status = status;
    out.iterations = iter;
    out.message = msg;
    return out;
  };

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    // Residuals, objective values, duality measures.
    std::vector<double> rdual(nvar);
    for (std::size_t i = 0; i < nvar; ++i) rdual[i] = c[i];
    double gap = 0.0, dobj = 0.0, rprim = 0.0;
    for (WorkBlock& b : blocks) {
      b.r = detail::eval_lmi(b, y) - b.s;
      rprim = std::max(rprim, b.r.max_abs() / (1.0 + b.f0.max_abs()));
      gap += dot(b.s, b.z);
      dobj -= dot(b.f0, b.z);
      for (const SdpTerm& t : b.terms) {
        rdual[t.scalar] -= dot(t.coefficient, b.z);
      }
    }
    double pobj = 0.0;
    for (std::size_t i = 0; i < nvar; ++i) pobj += c[i] * y[i];
    double rdual_inf = 0.0;
    for (double v : rdual) rdual_inf = std::max(rdual_inf, std::abs(v));
    rdual_inf /= (1.0 + cscale);
    const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = gap / total_dim;
    const double score = std::max({relgap, rprim, rdual_inf});

    if (score < best_score) {
      best_score = score;
      best.y = y;
      best.objective_value = pobj;
      best.duality_gap = relgap;
    }

    if (relgap <= tolerance && rprim <= 1e-9 && rdual_inf <= 1e-9) {
      return finish(SdpStatus::optimal, iter, "converged");
    }

    // Primal infeasibility: a PSD dual direction annihilating every F_i with
    // a negative F0 pairing certifies that no feasible y exists.
    double znorm = 0.0, zf0 = 0.0;
    for (const WorkBlock& b : blocks) {
      znorm += b.z.norm_fro();
      zf0 += dot(b.f0, b.z);
    }
    if (znorm > 1e7 * initial_znorm) {
      double fmax = 1.0;
      for (const WorkBlock& b : blocks)
        for (const SdpTerm& t : b.terms)
          fmax = std::max(fmax, t.coefficient.max_abs());
      // rdual holds c_i - <F_i, Z>, so <F_i, Z> = c_i - rdual_i.
      double ray_res = 0.0;
      for (std::size_t i = 0; i < nvar; ++i) {
        ray_res = std::max(ray_res, std::abs(c[i] - rdual[i]) / znorm);
      }
      if (ray_res <= 1e-8 * fmax && zf0 / znorm <= -1e-9) {
        return finish(SdpStatus::infeasible, iter,
                      "dual ray certifies primal infeasibility");
      }
    }
    // Unboundedness: an LMI-recession direction with negative cost.
    double ynorm = 0.0;
    for (double v : y) ynorm = std::max(ynorm, std::abs(v));
    if (ynorm > 1e12 && pobj < -1e10 * (1.0 + cscale)) {
      bool recession = true;
      for (const WorkBlock& b : blocks) {
        Matrix dir = Matrix::zeros(b.size, b.size);
        for (const SdpTerm& t : b.terms)
          dir += t.coefficient * (y[t.scalar] / ynorm);
        if (min_eigenvalue(dir) < -1e-8) {
          recession = false;
          break;
        }
      }
      if (recession) {
        return finish(SdpStatus::unbounded, iter,
                      "objective decreases along a feasible ray");
      }
    }

    // Stall detection: give back the best verified iterate instead of
    // grinding on a numerically exhausted Newton system.
    if (score > 0.999 * prev_score) {
      ++stalled;
    } else {
      stalled = 0;
    }
    prev_score = score;
    if (stalled >= 12) {
      return finish(SdpStatus::max_iterations, iter,
                    schur_regularized
                        ? "stalled; Newton system required regularization "
                          "(ill-conditioned)"
                        : "stalled before reaching requested tolerance");
    }

    // NT scaling for every block.
    bool scaling_ok = true;
    try {
      for (WorkBlock& b : blocks) {
        CholeskyResult ls = cholesky(b.s);
        CholeskyResult lz = cholesky(b.z);
        if (!ls.success || !lz.success) {
          scaling_ok = false;
          break;
        }
        b.w = detail::nt_scaling(ls.l, b.z);
        b.winv = detail::nt_scaling(lz.l, b.s);
        CholeskyResult gw = cholesky(b.w);
        if (!gw.success) {
          scaling_ok = false;
          break;
        }
        b.g = gw.l;
        const Matrix vs = forward_substitute(b.g, b.s);
        const Matrix v1 = forward_substitute(b.g, vs.transpose());
        const Matrix v2 = b.g.transpose() * b.z * b.g;
        b.v = symmetrize((v1 + v2) * 0.5);
        b.veig = sym_eig(b.v);
        if (b.veig.values.front() <= 0.0) {
          scaling_ok = false;
          break;
        }
      }
    } catch (const NotPositiveDefinite&) {
      scaling_ok = false;
    }
    if (!scaling_ok) {
      return finish(SdpStatus::max_iterations, iter,
                    "iterate left the positive-definite cone (conditioning)");
    }

    // Schur complement matrix M_ij = sum_k <F_i, W^-1 F_j W^-1>.
    Matrix schur = Matrix::zeros(nvar, nvar);
    std::vector<std::vector<Matrix>> winv_f(blocks.size());
    for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
      const WorkBlock& b = blocks[kb];
      winv_f[kb].reserve(b.terms.size());
      for (const SdpTerm& t : b.terms) {
        winv_f[kb].push_back(
            symmetrize(b.winv * t.coefficient * b.winv));
      }
      for (std::size_t ti = 0; ti < b.terms.size(); ++ti) {
        for (std::size_t tj = ti; tj < b.terms.size(); ++tj) {
          const double m = dot(b.terms[ti].coefficient, winv_f[kb][tj]);
          const std::size_t i = b.terms[ti].scalar;
          const std::size_t j = b.terms[tj].scalar;
          schur(i, j) += m;
          if (i != j) schur(j, i) += m;
        }
      }
    }
    double max_diag = 0.0;
    for (std::size_t i = 0; i < nvar; ++i)
      max_diag = std::max(max_diag, schur(i, i));
    double reg = 0.0;
    CholeskyResult schur_chol = cholesky(symmetrize(schur));
    while (!schur_chol.success) {
      reg = (reg == 0.0) ? 1e-13 * std::max(1.0, max_diag) : reg * 100.0;
      if (reg > 1e-4 * std::max(1.0, max_diag)) {
        return finish(SdpStatus::max_iterations, iter,
                      "Newton system is numerically singular "
                      "(ill-conditioned)");
      }
      schur_regularized = true;
      Matrix reg_m = symmetrize(schur);
      for (std::size_t i = 0; i < nvar; ++i) reg_m(i, i) += reg;
      schur_chol = cholesky(reg_m);
    }

    auto schur_solve = [&](const std::vector<double>& rhs) {
      Matrix x = Matrix::column(rhs);
      Matrix sol = backward_substitute_transposed(
          schur_chol.l, forward_substitute(schur_chol.l, x));
      // One round of iterative refinement in working precision.
      Matrix resid = x - schur * sol;
      Matrix corr = backward_substitute_transposed(
          schur_chol.l, forward_substitute(schur_chol.l, resid));
      sol += corr;
      std::vector<double> out(nvar);
      for (std::size_t i = 0; i < nvar; ++i) out[i] = sol(i, 0);
      return out;
    };

    // Shared right-hand-side pieces: -<F_i, W^-1 R W^-1> - r_i.
    std::vector<double> rhs_base(nvar);
    std::vector<Matrix> winv_r(blocks.size());
    for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
      const WorkBlock& b = blocks[kb];
      winv_r[kb] = symmetrize(b.winv * b.r * b.winv);
    }
    for (std::size_t i = 0; i < nvar; ++i) rhs_base[i] = -rdual[i];
    for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
      const WorkBlock& b = blocks[kb];
      for (const SdpTerm& t : b.terms) {
        rhs_base[t.scalar] -= dot(t.coefficient, winv_r[kb]);
      }
    }

    // Builds directions for a given scaled complementarity target T_k, then
    // reports the boundary steps.
    auto build_directions = [&](const std::vector<Matrix>& tmats,
                               std::vector<double>& dy) {
      std::vector<double> rhs = rhs_base;
      std::vector<Matrix> ghat(blocks.size());
      for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
        const WorkBlock& b = blocks[kb];
        // ghat = G^-T T G^-1 via two triangular solves against G^T.
        ghat[kb] = symmetrize(
            backward_substitute_transposed(b.g,
                backward_substitute_transposed(b.g, tmats[kb]).transpose()));
        for (const SdpTerm& t : b.terms) {
          rhs[t.scalar] += dot(t.coefficient, ghat[kb]);
        }
      }
      dy = schur_solve(rhs);
      for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
        WorkBlock& b = blocks[kb];
        b.ds = b.r;
        for (const SdpTerm& t : b.terms) {
          if (dy[t.scalar] != 0.0) b.ds += t.coefficient * dy[t.scalar];
        }
        b.ds = symmetrize(b.ds);
        b.dz = symmetrize(ghat[kb] - b.winv * b.ds * b.winv);
      }
    };

    auto boundary_steps = [&](double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (WorkBlock& b : blocks) {
        CholeskyResult ls = cholesky(b.s);
        CholeskyResult lz = cholesky(b.z);
        ap = std::min(ap, detail::max_psd_step(ls.l, b.ds));
        ad = std::min(ad, detail::max_psd_step(lz.l, b.dz));
      }
    };

    // Predictor (affine scaling direction): T = -V in the scaled space.
    std::vector<Matrix> tmats(blocks.size());
    for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
      tmats[kb] = blocks[kb].v * -1.0;
    }
    std::vector<double> dy;
    build_directions(tmats, dy);
    double ap_aff, ad_aff;
    boundary_steps(ap_aff, ad_aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);

    double gap_aff = 0.0;
    for (const WorkBlock& b : blocks) {
      gap_aff += dot(b.s + b.ds * ap_aff, b.z + b.dz * ad_aff);
    }
    gap_aff = std::max(0.0, gap_aff);
    const double mu_aff = gap_aff / total_dim;
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 1e-8, 0.99999);

    // Corrector with Mehrotra second-order term in the scaled space.
    for (std::size_t kb = 0; kb < blocks.size(); ++kb) {
      WorkBlock& b = blocks[kb];
      const Matrix ds_hat_t = forward_substitute(b.g, b.ds);
      const Matrix ds_hat = forward_substitute(b.g, ds_hat_t.transpose());
      const Matrix dz_hat = b.g.transpose() * b.dz * b.g;
      Matrix rc = b.v * b.v * -1.0;
      for (std::size_t i = 0; i < b.size; ++i) rc(i, i) += sigma * mu;
      rc -= symmetrize(ds_hat * dz_hat);
      tmats[kb] = detail::lyap_solve(b.veig, symmetrize(rc));
    }
    build_directions(tmats, dy);
    double ap, ad;
    boundary_steps(ap, ad);
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);

    // Apply the step, backing off if roundoff pushed an iterate out of the
    // cone.
    for (int attempt = 0; attempt < 8; ++attempt) {
      bool ok = true;
      for (WorkBlock& b : blocks) {
        if (!cholesky(symmetrize(b.s + b.ds * ap)).success ||
            !cholesky(symmetrize(b.z + b.dz * ad)).success) {
          ok = false;
          break;
        }
      }
      if (ok) break;
      ap *= 0.7;
      ad *= 0.7;
    }
    if (ap < 1e-10 && ad < 1e-10) {
      return finish(SdpStatus::max_iterations, iter,
                    "step length collapsed (ill-conditioned Newton system)");
    }
    for (std::size_t i = 0; i < nvar; ++i) y[i] += ap * dy[i];
    for (WorkBlock& b : blocks) {
      b.s = symmetrize(b.s + b.ds * ap);
      b.z = symmetrize(b.z + b.dz * ad);
    }
  }

  return finish(SdpStatus::max_iterations, max_iterations,
                schur_regularized
                    ? "iteration cap reached; Newton system required "
                      "regularization (ill-conditioned)"
                    : "iteration cap reached");
}

}  // namespace peakgain
