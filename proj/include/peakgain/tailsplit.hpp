#pragma once

// Head-plus-tail decomposition of the l1 norm: exact quadrature of |h| on
// [0, t0] plus a certified star-norm bound on the tail, obtained from the
// shifted system whose input matrix is e^{A t0} B.

#include <stdexcept>
#include <string>

#include "peakgain/linalg.hpp"
#include "peakgain/model.hpp"
#include "peakgain/oracle.hpp"
#include "peakgain/starnorm.hpp"

namespace peakgain {

// Same dynamics and output, input matrix advanced by t0 along the flow.
inline LtiSystem shifted_system(const LtiSystem& sys, double t0) {
  if (!(t0 > 0.0)) {
    throw std::invalid_argument("shifted_system: t0 must be positive");
  }
  const Matrix bt = expm(sys.a * t0) * sys.b;
  return make_system(sys.a, bt, sys.c, sys.name + "_shifted");
}

struct TailSplitResult {
  double t0 = 0.0;
  double head = 0.0;        // integral of |h| over [0, t0]
  double tail_bound = 0.0;  // star-norm bound on the integral over [t0, inf)
  double total = 0.0;       // head + tail_bound, a certified upper bound
  int degree = 1;
};

inline TailSplitResult tail_split(const LtiSystem& sys, double t0, int degree,
                                  double quad_tolerance = 1e-9) {
  if (!(quad_tolerance > 0.0)) {
    throw std::invalid_argument("tail_split: quad_tolerance must be positive");
  }
  const LtiSystem shifted = shifted_system(sys, t0);  // validates t0
  TailSplitResult result;
  result.t0 = t0;
  result.degree = degree;
  result.head = integrate_abs_impulse(sys, 0.0, t0, quad_tolerance).value;
  result.tail_bound = sweep(shifted, degree).star_norm;
  result.total = result.head + result.tail_bound;
  return result;
}

}  // namespace peakgain
