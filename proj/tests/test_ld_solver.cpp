#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ldnet/errors.hpp"
#include "ldnet/ld_solver.hpp"
#include "test_util.hpp"

using namespace ldnet;
using test_util::random_params;

namespace {

RegimeMGF mgf_plus(const NetworkParams& p) {
  return {interior_jumps(p), MgfRole::Interior};
}
RegimeMGF mgf_minus(const NetworkParams& p) {
  return {boundary_jumps(p), MgfRole::XBoundary};
}

// fixed representatives of the three regimes
const NetworkParams kJitter{1.0, 1.0, 4.0, 5.0, 4.0, 0.3, 0.2};
const NetworkParams kBridge{1.0, 1.5, 2.5, 2.0, 4.0, 0.1, 0.1};
const NetworkParams kCascade{0.2, 1.0, 2.0, 1.6, 2.0, 0.3, 0.9};

}  // namespace

TEST_CASE("theta_b: decoupled pair closed form") {
  // M+ separates; x = exp(theta1) solves x^2 - 4x + 2 = 0, rightmost root
  const NetworkParams p{1.0, 1.0, 2.0, 4.0, 2.0, 0.0, 0.0};
  const Vec2 tb = solve_theta_b(mgf_plus(p));
  CHECK(tb[0] == doctest::Approx(1.2279471772995157).epsilon(1e-12));
  CHECK(tb[1] == doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("theta_b: defining equations hold to 1e-10") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 60; ++i) {
    const NetworkParams p = random_params(rng, false, true);
    const RegimeMGF m = mgf_plus(p);
    const Vec2 tb = solve_theta_b(m);
    CHECK(tb[0] > 0.0);
    CHECK(std::abs(m.eval(tb)) <= 1e-10 * std::max(1.0, m.total_rate()));
    CHECK(std::abs(m.grad(tb)[1]) <= 1e-10 * std::max(1.0, m.total_rate()));
  }
}

TEST_CASE("theta_b: profile is nonpositive at the origin side") {
  const RegimeMGF m = mgf_plus(kJitter);
  const double t2 = vertical_tangent_theta2(m, 0.0);
  CHECK(m.eval(Vec2(0.0, t2)) <= 0.0);
}

TEST_CASE("theta_b: bracket cap reports NoSignChange") {
  // vanishing arrival rate pushes the crossing beyond theta1 = 50
  const NetworkParams p{1e-30, 1.0, 2.0, 4.0, 2.0, 0.0, 0.0};
  CHECK_THROWS_AS(solve_theta_b(mgf_plus(p)), NoSignChange);
}

TEST_CASE("theta_j: Jackson closed form") {
  const RegimeMGF m = mgf_plus(kJitter);
  const Vec2 tb = solve_theta_b(m);
  const Vec2 tj = solve_theta_j(kJitter, m, tb);
  const TrafficSolution t = solve_traffic(kJitter);
  CHECK(std::exp(tj[0]) == doctest::Approx(1.0 / t.rho1).epsilon(1e-12));
  CHECK(std::exp(tj[1]) ==
        doctest::Approx(kJitter.r20() + kJitter.r21 / t.rho1).epsilon(1e-12));
}

TEST_CASE("theta_j: Jackson closed form with no exogenous node-2 arrivals") {
  // lambda2_bar = 0 collapses the quadratic to its linear term
  const NetworkParams p{1.0, 0.0, 4.0, 5.0, 4.0, 0.5, 0.2};
  const RegimeMGF m = mgf_plus(p);
  const Vec2 tj = solve_theta_j(p, m, solve_theta_b(m));
  const TrafficSolution t = solve_traffic(p);
  CHECK(std::exp(tj[0]) == doctest::Approx(1.0 / t.rho1).epsilon(1e-12));
}

TEST_CASE("theta_j: no qualifying root falls back to theta_b") {
  const RegimeMGF m = mgf_plus(kBridge);
  const Vec2 tb = solve_theta_b(m);
  const Vec2 tj = solve_theta_j(kBridge, m, tb);
  CHECK(tj[0] == tb[0]);
  CHECK(tj[1] == tb[1]);
}

TEST_CASE("theta_j: qualifying point sits on both level curves") {
  std::mt19937_64 rng(32);
  int crossings = 0;
  for (int i = 0; i < 80; ++i) {
    const NetworkParams p = random_params(rng, false, true);
    const RegimeMGF mp = mgf_plus(p);
    const RegimeMGF mm = mgf_minus(p);
    const Vec2 tb = solve_theta_b(mp);
    const Vec2 tj = solve_theta_j(p, mp, tb);
    if (tj == tb) continue;
    ++crossings;
    const double scale = std::max(1.0, mp.total_rate());
    CHECK(std::abs(mp.eval(tj)) <= 1e-10 * scale);
    CHECK(std::abs(mm.eval(tj)) <= 1e-10 * scale);
    CHECK(tj[0] > 0.0);
    CHECK(tj[0] < tb[0]);
  }
  CHECK(crossings > 10);
}

TEST_CASE("theta_j: arc tracing agrees with the quadratic") {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 40; ++i) {
    const NetworkParams p = random_params(rng, false, true);
    const RegimeMGF mp = mgf_plus(p);
    const RegimeMGF mm = mgf_minus(p);
    const Vec2 tb = solve_theta_b(mp);
    const Vec2 tj = solve_theta_j(p, mp, tb);
    const auto traced = theta_j_by_arc_tracing(mp, mm, tb);
    if (tj == tb) {
      CHECK(!traced.has_value());
    } else {
      REQUIRE(traced.has_value());
      CHECK((*traced - tj).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
  }
}

TEST_CASE("theta_c: cascade branch and its level-curve identity") {
  const RegimeMGF m = mgf_plus(kCascade);
  const Vec2 tb = solve_theta_b(m);
  const auto [tc, h] = solve_theta_c(kCascade, m, tb);
  const TrafficSolution t = solve_traffic(kCascade);
  CHECK(tc[0] == doctest::Approx(std::log(1.0 / t.rho1)).epsilon(1e-13));
  CHECK(tc[1] == doctest::Approx(std::log(1.0 / t.rho2)).epsilon(1e-13));
  CHECK(h > 0.0);
  CHECK(std::abs(m.eval(tc)) <= 1e-12 * m.total_rate());
  const Vec2 v = m.grad(tc);
  CHECK(v[0] > 0.0);
  CHECK(h == doctest::Approx(-v[1] / v[0]).epsilon(1e-13));
}

TEST_CASE("theta_c: bridge branch when the y-axis condition fails") {
  const RegimeMGF m = mgf_plus(kJitter);
  const Vec2 tb = solve_theta_b(m);
  const auto [tc, h] = solve_theta_c(kJitter, m, tb);
  CHECK(h == 0.0);
  CHECK(tc[0] == tb[0]);
}

TEST_CASE("regime classification: the three Jackson cases") {
  // (2.2) holds -> Jitter
  CHECK(analyze(kJitter).regime == Regime::Jitter);
  // (2.2) fails strictly -> Cascade
  CHECK(analyze(kCascade).regime == Regime::Cascade);
  // equality in (2.2) -> Bridge
  NetworkParams eq{1.0, 1.0, 3.0, 2.0, 3.0, 0.5, 0.5};
  const TrafficSolution t = solve_traffic(eq);
  eq.mu2 = t.lambda2 * (eq.r20() + eq.r21 * eq.mu1 / t.lambda1);
  const LDAnalysis a = analyze(eq);
  CHECK(a.regime == Regime::Bridge);
  const TrafficSolution t2 = solve_traffic(eq);
  CHECK(a.rate == doctest::Approx(std::log(1.0 / t2.rho1)).epsilon(1e-9));
}

TEST_CASE("analyze: pure Jackson rate is log(1/rho1) in every regime") {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 120; ++i) {
    const NetworkParams p = random_params(rng, true, true);
    const LDAnalysis a = analyze(p);
    const double expected = std::log(1.0 / a.traffic.rho1);
    CHECK(std::abs(a.rate - expected) <= 1e-8);
  }
}

TEST_CASE("analyze: rejects transient and boundary inputs") {
  CHECK_THROWS_AS(analyze(NetworkParams{1, 3, 4, 2, 4, 0.3, 0.2}),
                  RejectsUnstable);
  NetworkParams p{2.0, 0.5, 1.0, 2.0, 1.0, 0.0, 0.0};
  const TrafficSolution t = solve_traffic(p);
  p.mu1_star = (t.lambda1 - t.rho2 * p.mu1) / (1.0 - t.rho2);
  CHECK_THROWS_AS(analyze(p), RejectsUnstable);
}

TEST_CASE("analyze: helping stabilizes rho1 > 1 and analysis succeeds") {
  NetworkParams p{1.2, 0.3, 1.0, 2.0, 1.0, 0.0, 0.0};
  const TrafficSolution t = solve_traffic(p);
  REQUIRE(t.rho1 > 1.0);
  p.mu1_star = (t.lambda1 - t.rho2 * p.mu1) / (1.0 - t.rho2) * 1.001;
  REQUIRE(classify_stability(p).cls == Stability::Stable);
  const LDAnalysis a = analyze(p);
  CHECK(a.rate > 0.0);
  CHECK(a.rate <= a.theta_b[0]);
}

TEST_CASE("analyze: duality residuals and orderings") {
  std::mt19937_64 rng(35);
  for (int i = 0; i < 60; ++i) {
    const NetworkParams p = random_params(rng, false, true);
    const RegimeMGF mp = mgf_plus(p);
    const RegimeMGF mm = mgf_minus(p);
    const LDAnalysis a = analyze(p);
    const double scale = std::max(1.0, mp.total_rate());

    CHECK(std::abs(mp.eval(a.theta_b)) <= 1e-10 * scale);
    CHECK(std::abs(mp.grad(a.theta_b)[1]) <= 1e-10 * scale);
    CHECK(std::abs(mp.eval(a.theta_c)) <= 1e-10 * scale);
    CHECK(std::abs(mp.eval(a.theta_j)) <= 1e-10 * scale);
    if (a.regime == Regime::Jitter)
      CHECK(std::abs(mm.eval(a.theta_j)) <= 1e-10 * scale);

    CHECK(a.theta_j[0] <= a.theta_b[0] + 1e-12);
    CHECK(a.theta_c[0] <= a.theta_b[0] + 1e-12);
    CHECK(a.rate <= a.theta_b[0] + 1e-12);
  }
}

TEST_CASE("analyze: Theorem 2 equivalence chain") {
  std::mt19937_64 rng(36);
  const double tol = 1e-9;
  for (int i = 0; i < 100; ++i) {
    const NetworkParams p = random_params(rng, false, true);
    const RegimeMGF mm = mgf_minus(p);
    const LDAnalysis a = analyze(p);
    const bool c1 = a.theta_j[0] < a.theta_b[0] - tol;
    const bool c3 = a.beta < 1.0 - tol;
    const bool c4 = mm.eval(a.theta_b) > tol;
    const bool c5 = a.rho < 1.0 - tol;
    CHECK(c1 == c3);
    CHECK(c1 == c4);
    CHECK(c1 == c5);
  }
}

TEST_CASE("analyze: rate continuous in mu1_star across the regime change") {
  NetworkParams p = kJitter;
  double prev = 0.0;
  bool first = true;
  bool saw_jitter = false, saw_bridge = false;
  for (double ms = 6.8; ms <= 7.1; ms += 1e-3) {
    p.mu1_star = ms;
    const LDAnalysis a = analyze(p);
    if (a.regime == Regime::Jitter) saw_jitter = true;
    if (a.regime == Regime::Bridge) saw_bridge = true;
    if (!first) CHECK(std::abs(a.rate - prev) <= 1e-4);
    prev = a.rate;
    first = false;
  }
  CHECK(saw_jitter);
  CHECK(saw_bridge);
}

TEST_CASE("g_minus is increasing in mu1_star along its span") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 30; ++i) {
    NetworkParams p = random_params(rng, false, true);
    NetworkParams q = p;
    q.mu1_star += 0.5;
    const double end = std::log(p.mu1_star / p.lambda1_bar);
    if (!(end > 0.0)) continue;
    for (int k = 1; k < 20; ++k) {
      const double t1 = end * k / 20.0;
      CHECK(g_minus(q, t1) >= g_minus(p, t1) - 1e-12);
    }
  }
}

TEST_CASE("fluid path: bridge is forward plus return") {
  const FluidPath path = fluid_path(analyze(kBridge));
  REQUIRE(path.size() >= 2);
  CHECK(path[0].label == "bridge");
  REQUIRE(path[0].beta.has_value());
  CHECK(*path[0].beta == 1.0);
  CHECK(path[0].from == Vec2(0.0, 0.0));
  CHECK(path[0].to == Vec2(1.0, 0.0));
  CHECK(path.back().to == Vec2(0.0, 0.0));
}

TEST_CASE("fluid path: cascade climbs the wall first") {
  const LDAnalysis a = analyze(kCascade);
  const FluidPath path = fluid_path(a);
  REQUIRE(path.size() >= 3);
  CHECK(path[0].label == "climb");
  CHECK(path[0].to == Vec2(0.0, a.cascade_height));
  CHECK(path[1].label == "cascade");
  CHECK(path[1].to == Vec2(1.0, 0.0));
  REQUIRE(path[1].velocity.has_value());
  const Vec2 v = *path[1].velocity;
  CHECK(v[0] > 0.0);
  CHECK(-v[1] / v[0] == doctest::Approx(a.cascade_height).epsilon(1e-12));
}

TEST_CASE("fluid path: jitter mixture balances the vertical velocity") {
  const LDAnalysis a = analyze(kJitter);
  REQUIRE(a.regime == Regime::Jitter);
  const double v2 = a.beta * a.v_plus[1] + (1.0 - a.beta) * a.v_minus[1];
  CHECK(std::abs(v2) <= 1e-12);
  const FluidPath path = fluid_path(a);
  CHECK(path[0].label == "jitter");
  REQUIRE(path[0].velocity.has_value());
  const double v1 = a.beta * a.v_plus[0] + (1.0 - a.beta) * a.v_minus[0];
  CHECK((*path[0].velocity)[0] == doctest::Approx(v1).epsilon(1e-14));
  CHECK(a.v_plus[1] < 0.0);
  CHECK(a.v_minus[1] > 0.0);
}

TEST_CASE("fluid path: return leg ends at the origin heading west or down") {
  std::mt19937_64 rng(38);
  for (int i = 0; i < 40; ++i) {
    const NetworkParams p = random_params(rng, false, true);
    const FluidPath path = fluid_path(analyze(p));
    CHECK(path.back().to == Vec2(0.0, 0.0));
    const auto ret = std::find_if(
        path.begin(), path.end(),
        [](const PathSegment& s) { return s.label.rfind("return", 0) == 0; });
    REQUIRE(ret != path.end());
    REQUIRE(ret->velocity.has_value());
    CHECK((*ret->velocity)[0] <= 1e-12);
  }
}
