#include <doctest.h>

#include <cmath>

#include "ldnet/errors.hpp"
#include "ldnet/network.hpp"
#include "test_util.hpp"

using namespace ldnet;
using test_util::random_params;

namespace {

NetworkParams base(double l1, double l2, double m1, double m2, double ms,
                   double r12, double r21) {
  return NetworkParams{l1, l2, m1, m2, ms, r12, r21};
}

}  // namespace

TEST_CASE("traffic equations: no internal routing") {
  const auto t = solve_traffic(base(1, 1, 2, 2, 2, 0, 0));
  CHECK(t.lambda1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.lambda2 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("traffic equations: symmetric feedback closed form") {
  // (1 + 0.5) / (1 - 0.25) = 2
  const auto t = solve_traffic(base(1, 1, 4, 4, 4, 0.5, 0.5));
  CHECK(t.lambda1 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.lambda2 == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("traffic equations: residual against fixed-point oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const NetworkParams p = random_params(rng, false, false);
    const auto t = solve_traffic(p);
    const auto [f1, f2] = test_util::traffic_fixed_point(p);
    CHECK(std::abs(t.lambda1 - f1) <= 1e-12 * f1);
    CHECK(std::abs(t.lambda2 - f2) <= 1e-12 * f2);
    // residual of the defining equations
    CHECK(std::abs(t.lambda1 - (p.lambda1_bar + t.lambda2 * p.r21)) <=
          1e-12 * t.lambda1);
    CHECK(std::abs(t.lambda2 - (p.lambda2_bar + t.lambda1 * p.r12)) <=
          1e-12 * t.lambda2);
  }
}

TEST_CASE("degenerate network rejected") {
  CHECK_THROWS_AS(solve_traffic(base(0, 1, 1, 1, 1, 0, 0)), DegenerateNetwork);
  CHECK_THROWS_AS(base(0, 1, 1, 1, 1, 0, 0).validate(), DegenerateNetwork);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(base(1, 1, 0, 1, 1, 0, 0).validate(), InvalidParams);
  CHECK_THROWS_AS(base(1, 1, 2, 1, 1, 0, 0).validate(), InvalidParams);  // ms < mu1
  CHECK_THROWS_AS(base(1, 1, 1, 1, 1, 1.2, 0).validate(), InvalidParams);
  CHECK_THROWS_AS(base(1, 1, 1, 1, 1, 1.0, 1.0).validate(), InvalidParams);
  CHECK_NOTHROW(base(1, 1, 3, 3, 3, 0.5, 0.5).validate());
}

TEST_CASE("stability: Jackson with both utilizations below one") {
  const NetworkParams p = base(1, 1, 4, 5, 4, 0.3, 0.2);
  CHECK(classify_stability(p).cls == Stability::Stable);
}

TEST_CASE("stability: overloaded node 2 is transient") {
  const NetworkParams p = base(1, 3, 4, 2, 4, 0.3, 0.2);
  const auto t = solve_traffic(p);
  REQUIRE(t.lambda2 > p.mu2);
  CHECK(classify_stability(p).cls == Stability::Transient);
}

TEST_CASE("stability: exact node-1 threshold reports Boundary") {
  NetworkParams p = base(2.0, 0.5, 1.0, 2.0, 1.0, 0.0, 0.0);
  const auto t = solve_traffic(p);
  // place mu1_star exactly at (lambda1 - rho2 mu1) / (1 - rho2)
  p.mu1_star = (t.lambda1 - t.rho2 * p.mu1) / (1.0 - t.rho2);
  REQUIRE(p.mu1_star >= p.mu1);
  CHECK(classify_stability(p).cls == Stability::Boundary);
}

TEST_CASE("stability: helping can stabilize rho1 > 1") {
  // lambda1 > mu1 but the boosted rate keeps node 1 drained
  const NetworkParams p = base(1.2, 0.3, 1.0, 2.0, 4.0, 0.0, 0.0);
  const auto t = solve_traffic(p);
  REQUIRE(t.rho1 > 1.0);
  CHECK(classify_stability(p).cls == Stability::Stable);
  CHECK(classify_stability(p).drift < 0.0);
}

TEST_CASE("stability: monotone in mu1_star") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    NetworkParams p = random_params(rng, false, false);
    const Stability before = classify_stability(p).cls;
    p.mu1_star += test_util::uniform(rng, 0.0, 2.0);
    const Stability after = classify_stability(p).cls;
    if (before == Stability::Stable) CHECK(after != Stability::Transient);
  }
}

TEST_CASE("jump measures: atoms and totals") {
  const NetworkParams p = base(1, 1.5, 4, 5, 6, 0.3, 0.2);
  const JumpMeasure mi = interior_jumps(p);
  CHECK(mi.size() == 6);
  CHECK(mi.total_rate() ==
        doctest::Approx(p.lambda1_bar + p.lambda2_bar + p.mu1 + p.mu2)
            .epsilon(1e-15));
  const JumpMeasure mb = boundary_jumps(p);
  CHECK(mb.size() == 4);
  CHECK(!mb.has_negative_dy());
}

TEST_CASE("jump measures: no help means boundary = interior minus service 2") {
  const NetworkParams p = base(1, 1, 4, 5, 4, 0.3, 0.2);
  const JumpMeasure mi = interior_jumps(p);
  const JumpMeasure mb = boundary_jumps(p);
  for (const JumpAtom& a : mb.atoms()) {
    bool matched = false;
    for (const JumpAtom& b : mi.atoms())
      if (a.dx == b.dx && a.dy == b.dy && a.rate == b.rate) matched = true;
    CHECK(matched);
  }
  CHECK(mi.size() == mb.size() + 2);
}

TEST_CASE("jump measures: r12 = 1 drops the plain departure atom") {
  const NetworkParams p = base(1, 1, 4, 5, 4, 1.0, 0.2);
  for (const JumpAtom& a : interior_jumps(p).atoms())
    CHECK(!(a.dx == -1 && a.dy == 0));
  for (const JumpAtom& a : boundary_jumps(p).atoms())
    CHECK(!(a.dx == -1 && a.dy == 0));
}

TEST_CASE("jump measures: interior and boundary agree off node-1 service") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    const NetworkParams p = random_params(rng, false, false);
    const JumpMeasure mi = interior_jumps(p);
    const JumpMeasure mb = boundary_jumps(p);
    for (const JumpAtom& a : mi.atoms()) {
      const bool node1_service = a.dx == -1;
      const bool node2_service = a.dy == -1;
      if (node1_service || node2_service) continue;
      bool matched = false;
      for (const JumpAtom& b : mb.atoms())
        if (a.dx == b.dx && a.dy == b.dy && a.rate == b.rate) matched = true;
      CHECK(matched);
    }
  }
}

TEST_CASE("reversed conditions: independent M/M/1 pair") {
  const auto [c22, c23] = reversed_conditions(base(1, 1, 2, 2, 2, 0, 0));
  CHECK(c22);
  CHECK(c23);
}

TEST_CASE("reversed conditions: equality counts as failing") {
  NetworkParams p = base(1, 1, 3, 2, 3, 0.5, 0.5);
  const auto t = solve_traffic(p);
  // tune mu2 so that rho2^{-1} == r20 + r21 / rho1 exactly
  const double target = p.r20() + p.r21 * p.mu1 / t.lambda1;
  p.mu2 = t.lambda2 * target;
  const auto [c22, c23] = reversed_conditions(p);
  CHECK(!c22);
  CHECK(c23);
}

TEST_CASE("reversed conditions: a stable Jackson network admits at least one") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const NetworkParams p = random_params(rng, true, true);
    const auto [c22, c23] = reversed_conditions(p);
    CHECK((c22 || c23));
  }
}
