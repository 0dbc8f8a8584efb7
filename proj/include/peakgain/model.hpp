#pragma once

// LTI system representation, stability classification, degree-2 Kronecker
// lifting, and generation of the S-procedure constraint structure for
// arbitrary state dimension n.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "peakgain/linalg.hpp"

namespace peakgain {

class UnstableSystem : public std::runtime_error {
 public:
  explicit UnstableSystem(double max_real_part)
      : std::runtime_error("system is not Hurwitz-stable (max real "
                           "eigenvalue part " +
                           std::to_string(max_real_part) + ")"),
        max_real_part_(max_real_part) {}
  double max_real_part() const { return max_real_part_; }

 private:
  double max_real_part_;
};

struct LtiSystem {
  std::string name;
  Matrix a;  // n x n state matrix
  Matrix b;  // n x 1 input matrix
  Matrix c;  // 1 x n output matrix
  std::size_t n = 0;
  double max_real_eigenvalue = 0.0;
};

// Strict margin for the stability gate; marginally stable systems would make
// the sweep interval (0, kappa) empty.
inline constexpr double kStabilityMargin = -1e-9;

inline LtiSystem make_system(const Matrix& a, const Matrix& b, const Matrix& c,
                             const std::string& name = "") {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("system: A must be square");
  }
  const std::size_t n = a.rows();
  if (b.rows() != n || b.cols() != 1) {
    throw std::invalid_argument("system: B must be " + std::to_string(n) +
                                "x1");
  }
  if (c.rows() != 1 || c.cols() != n) {
    throw std::invalid_argument("system: C must be 1x" + std::to_string(n));
  }
  a.require_finite();
  b.require_finite();
  c.require_finite();
  const Spectrum spec = eigenvalues(a);
  if (spec.max_real_part >= kStabilityMargin) {
    throw UnstableSystem(spec.max_real_part);
  }
  return LtiSystem{name, a, b, c, n, spec.max_real_part};
}

struct LiftedSystem {
  Matrix a_lift;  // n^2 x n^2
  Matrix b_lift;  // n^2 x n
  Matrix c_lift;  // 1 x n^2
  std::size_t base_dim = 0;
  static constexpr int degree = 2;
};

inline LiftedSystem lift(const LtiSystem& sys) {
  if (sys.n < 2) {
    throw std::invalid_argument("lift: requires state dimension n >= 2");
  }
  return LiftedSystem{kron_sum(sys.a, 2), kron_sum(sys.b, 2),
                      kron_power(sys.c, 2), sys.n};
}

// Row-major Kronecker coordinate of x_p * x_q inside x (x) x, zero-based.
inline std::size_t lift_index(std::size_t p, std::size_t q, std::size_t n) {
  return p * n + q;
}

struct SProcedureStructure {
  // One-based coordinates of the squared entries x_i^2 within the lifted
  // state (the w_i^2 <= zeta inequality positions), i.e. (i-1)*n + i.
  std::vector<std::size_t> inequality_indices;
  // Each matrix E (n^2 x n) encodes one bilinear equality zeta^T E w = 0 on
  // the lifted manifold, with exactly one +1 and one -1 entry.
  std::vector<Matrix> equality_matrices;
};

inline SProcedureStructure sprocedure_structure(std::size_t n) {
  if (n < 2) {
    throw std::invalid_argument(
        "sprocedure_structure: no lifting constraints exist for n < 2");
  }
  SProcedureStructure s;
  for (std::size_t i = 0; i < n; ++i) {
    s.inequality_indices.push_back(lift_index(i, i, n) + 1);
  }
  // Canonical enumeration: for each pair i < j and each k, the equality
  // w_i * (x_j x_k) - w_j * (x_i x_k) = 0 with x_j x_k at lift_index(j, k).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        Matrix e = Matrix::zeros(n * n, n);
        e(lift_index(j, k, n), i) = 1.0;
        e(lift_index(i, k, n), j) = -1.0;
        s.equality_matrices.push_back(e);
      }
    }
  }
  return s;
}

// Residual of the lifted dynamics at one point: the chain-rule derivative of
// x (x) x under xdot = Ax + Bu must equal a_lift (x(x)x) + b_lift (u x).
inline double verify_lift(const LtiSystem& sys, const LiftedSystem& lifted,
                          const std::vector<double>& x, double u) {
  const std::size_t n = sys.n;
  if (x.size() != n) {
    throw std::invalid_argument("verify_lift: x has wrong dimension");
  }
  const Matrix xv = Matrix::column(x);
  const Matrix xdot = sys.a * xv + sys.b * u;
  // d/dt (x (x) x) = xdot (x) x + x (x) xdot
  const Matrix lhs = kron(xdot, xv) + kron(xv, xdot);
  const Matrix zeta = kron(xv, xv);
  const Matrix w = xv * u;
  const Matrix rhs = lifted.a_lift * zeta + lifted.b_lift * w;
  return (lhs - rhs).norm_fro();
}

}  // namespace peakgain
