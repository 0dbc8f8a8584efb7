#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "peakgain/linalg.hpp"
#include "peakgain/model.hpp"
#include "peakgain/oracle.hpp"
#include "peakgain/tailsplit.hpp"

using namespace peakgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LtiSystem low_damping() {
  return make_system(Matrix{{0.0, 1.0}, {-0.5, -0.5}}, Matrix{{0.0}, {1.0}},
                     Matrix{{1.0, 1.0}}, "low-damping");
}

LtiSystem stiff() {
  return make_system(Matrix{{-1.0, 0.0}, {0.0, -100.0}},
                     Matrix{{1.0}, {100.0}}, Matrix{{1.0, -2.0}}, "stiff");
}

}  // namespace

TEST_CASE("shifted system advances the input matrix along the flow",
          "[tailsplit]") {
  const LtiSystem st = stiff();
  const LtiSystem shifted = shifted_system(st, 0.05);
  REQUIRE((shifted.a - st.a).max_abs() == 0.0);
  REQUIRE((shifted.c - st.c).max_abs() == 0.0);
  REQUIRE_THAT(shifted.b(0, 0), WithinRel(std::exp(-0.05), 1e-12));
  REQUIRE_THAT(shifted.b(1, 0), WithinRel(100.0 * std::exp(-5.0), 1e-12));

  // t0 -> 0 limit recovers B (1e-12 * |A B| ~ 1e-8 absolute here).
  const LtiSystem tiny = shifted_system(st, 1e-12);
  REQUIRE((tiny.b - st.b).max_abs() < 1e-7);

  REQUIRE_THROWS_AS(shifted_system(st, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(shifted_system(st, -1.0), std::invalid_argument);
}

TEST_CASE("low-damping degree-1 split totals", "[tailsplit]") {
  const LtiSystem ld = low_damping();
  const double expected[] = {4.5664, 4.4043, 4.3366, 4.3096};
  const double t0s[] = {2.0, 5.0, 10.0, 20.0};
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const TailSplitResult r = tail_split(ld, t0s[k], 1);
    REQUIRE_THAT(r.total, WithinRel(expected[k], 5e-3));
    REQUIRE_THAT(r.head + r.tail_bound, WithinAbs(r.total, 1e-12));
    // Totals tighten monotonically as the split point grows.
    REQUIRE(r.total <= prev + 1e-9);
    prev = r.total;
  }
}

TEST_CASE("low-damping degree-2 split totals", "[tailsplit]") {
  const LtiSystem ld = low_damping();
  const double expected[] = {4.9701, 4.4720, 4.3702};
  const double t0s[] = {2.0, 5.0, 10.0};
  for (int k = 0; k < 3; ++k) {
    const TailSplitResult r = tail_split(ld, t0s[k], 2);
    REQUIRE_THAT(r.total, WithinRel(expected[k], 5e-3));
    REQUIRE(r.degree == 2);
  }

  // At t0 = 20 the shifted input is ~e^{-5} small and the degree-2 sweep
  // landscape is nearly flat, so the certified minimum depends on how far
  // the solver pushes into the flat valley.  Pin the invariants instead of
  // a solver-specific value: the result must stay a certified upper bound
  // on the exact norm and must not exceed the loosest point of the valley.
  const double exact = l1_exact(ld, 1e-8).value;
  const TailSplitResult r20 = tail_split(ld, 20.0, 2);
  REQUIRE(r20.total >= exact - 1e-9);
  REQUIRE(r20.total <= 4.40);
}

TEST_CASE("stiff split at t0 = 0.05", "[tailsplit]") {
  const LtiSystem st = stiff();
  const TailSplitResult d2 = tail_split(st, 0.05, 2);
  REQUIRE_THAT(d2.head, WithinRel(1.937754, 1e-3));
  REQUIRE_THAT(d2.total, WithinRel(2.880211, 5e-3));

  const TailSplitResult d1 = tail_split(st, 0.05, 1);
  REQUIRE(d1.total >= d2.total - 1e-9);  // lifting tightens the stiff tail
}

TEST_CASE("split totals remain upper bounds on the exact norm",
          "[tailsplit]") {
  for (const LtiSystem& sys : {low_damping(), stiff()}) {
    const double exact = l1_exact(sys, 1e-8).value;
    for (double t0 : {0.5, 2.0}) {
      for (int degree : {1, 2}) {
        const TailSplitResult r = tail_split(sys, t0, degree);
        REQUIRE(r.total >= exact * (1.0 - 1e-9));
      }
    }
  }
}

TEST_CASE("tail_split argument validation", "[tailsplit]") {
  const LtiSystem ld = low_damping();
  REQUIRE_THROWS_AS(tail_split(ld, -1.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(tail_split(ld, 1.0, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(tail_split(ld, 1.0, 1, -1e-9), std::invalid_argument);
}
