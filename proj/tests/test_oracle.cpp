#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "peakgain/linalg.hpp"
#include "peakgain/model.hpp"
#include "peakgain/oracle.hpp"
#include "peakgain/starnorm.hpp"

using namespace peakgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LtiSystem high_damping() {
  return make_system(Matrix{{0.0, 1.0}, {-4.0, -4.0}}, Matrix{{0.0}, {1.0}},
                     Matrix{{1.0, 1.0}}, "high-damping");
}

LtiSystem low_damping() {
  return make_system(Matrix{{0.0, 1.0}, {-0.5, -0.5}}, Matrix{{0.0}, {1.0}},
                     Matrix{{1.0, 1.0}}, "low-damping");
}

LtiSystem stiff() {
  return make_system(Matrix{{-1.0, 0.0}, {0.0, -100.0}},
                     Matrix{{1.0}, {100.0}}, Matrix{{1.0, -2.0}}, "stiff");
}

LtiSystem scalar_system() {
  return make_system(Matrix{{-1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, "scalar");
}

// Closed form for the stiff system: integral of |e^-t - 200 e^-100t| dt,
// whose single sign change is at t* = ln(200)/99.
double stiff_l1_closed_form() {
  return 1.0 + 2.0 * std::pow(200.0, -1.0 / 99.0) -
         4.0 * std::pow(200.0, -100.0 / 99.0);
}

}  // namespace

TEST_CASE("impulse response closed forms", "[oracle]") {
  REQUIRE_THAT(impulse(high_damping(), 0.0), WithinAbs(1.0, 1e-14));

  const LtiSystem st = stiff();
  for (double t : {0.0, 0.01, 0.0535, 0.1, 1.0, 5.0}) {
    const double expected = std::exp(-t) - 200.0 * std::exp(-100.0 * t);
    REQUIRE_THAT(impulse(st, t), WithinAbs(expected, 1e-10));
  }

  const LtiSystem sc = scalar_system();
  REQUIRE_THAT(impulse(sc, 1.3), WithinRel(std::exp(-1.3), 1e-12));

  REQUIRE_THROWS_AS(impulse(sc, -0.1), std::invalid_argument);
}

TEST_CASE("exact l1 norms of the reference systems", "[oracle]") {
  const L1Estimate hd = l1_exact(high_damping(), 1e-6);
  REQUIRE_THAT(hd.value, WithinAbs(0.3176676, 1e-5));

  const L1Estimate ld = l1_exact(low_damping(), 1e-6);
  REQUIRE_THAT(ld.value, WithinAbs(4.3069119, 1e-4));

  const L1Estimate st = l1_exact(stiff(), 1e-6);
  REQUIRE_THAT(st.value, WithinAbs(stiff_l1_closed_form(), 2e-5));

  // Scalar system: integral of e^-t is exactly 1.
  const L1Estimate sc = l1_exact(scalar_system(), 1e-8);
  REQUIRE_THAT(sc.value, WithinAbs(1.0, 1e-7));
}

TEST_CASE("l1 estimate error budget invariant", "[oracle]") {
  for (const LtiSystem& sys : {high_damping(), low_damping(), stiff()}) {
    const double tol = 1e-6;
    const L1Estimate est = l1_exact(sys, tol);
    REQUIRE(est.tail_bound + est.quadrature_error <= tol * est.value);
    REQUIRE(est.tail_bound >= 0.0);
    REQUIRE(est.truncation_time > 0.0);
  }
  REQUIRE_THROWS_AS(l1_exact(high_damping(), 0.0), std::invalid_argument);
}

TEST_CASE("l1 estimate is stable under tolerance tightening", "[oracle]") {
  const LtiSystem sys = low_damping();
  const L1Estimate loose = l1_exact(sys, 1e-4);
  const L1Estimate tight = l1_exact(sys, 1e-8);
  const double budget = (1e-4 + 1e-8) * tight.value * 1.1;
  REQUIRE(std::abs(loose.value - tight.value) <= budget);
}

TEST_CASE("worst-case bang-bang run reproduces the lower bound", "[oracle]") {
  const LtiSystem sys = high_damping();
  const Matrix shape = worst_case_default_shape(sys);
  const WorstCaseRun run = worst_case(sys, shape, 1e-3, default_horizon(sys));
  REQUIRE_THAT(run.peak_output, WithinRel(0.309742, 2e-3));

  // Bang-bang: |u| = 1 at every sample; sign(0) resolves to +1 at the origin.
  REQUIRE(run.trajectory.front().u == 1.0);
  for (const TrajectorySample& s : run.trajectory) {
    REQUIRE(std::abs(s.u) == 1.0);
  }
  // The trajectory departs the origin.
  REQUIRE(std::abs(run.trajectory.back().x[0]) +
              std::abs(run.trajectory.back().x[1]) >
          0.0);
}

TEST_CASE("worst-case peak is a valid lower bound", "[oracle]") {
  for (const LtiSystem& sys : {high_damping(), low_damping(), stiff()}) {
    const L1Estimate exact = l1_exact(sys, 1e-6);
    const Matrix shape = worst_case_default_shape(sys);
    const WorstCaseRun run =
        worst_case(sys, shape, 1e-3, default_horizon(sys));
    REQUIRE(run.peak_output <= exact.value * (1.0 + 1e-9));
  }
}

TEST_CASE("worst-case peak converges in the step size", "[oracle]") {
  const LtiSystem sys = high_damping();
  const Matrix shape = worst_case_default_shape(sys);
  const double horizon = default_horizon(sys);
  const double coarse = worst_case(sys, shape, 1e-3, horizon).peak_output;
  const double fine = worst_case(sys, shape, 0.5e-3, horizon).peak_output;
  REQUIRE(std::abs(coarse - fine) < 1e-3 * fine);
}

TEST_CASE("worst-case input validation", "[oracle]") {
  const LtiSystem sys = high_damping();
  REQUIRE_THROWS_AS(worst_case(sys, Matrix::identity(2), 0.0, 1.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(worst_case(sys, Matrix::identity(2), 1e-3, -1.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(worst_case(sys, Matrix::identity(3), 1e-3, 1.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      worst_case(sys, Matrix{{1.0, 2.0}, {2.0, 1.0}}, 1e-3, 1.0),
      std::invalid_argument);

  REQUIRE(bang_bang_sign(0.0) == 1.0);
  REQUIRE(bang_bang_sign(-0.0) == 1.0);
  REQUIRE(bang_bang_sign(-3.0) == -1.0);
  REQUIRE_THAT(default_horizon(sys), WithinAbs(5.0, 1e-4));
}
