#include "ldnet/ld_solver.hpp"

#include <algorithm>
#include <cmath>

#include "ldnet/errors.hpp"

namespace ldnet {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Jitter: return "Jitter";
    case Regime::Bridge: return "Bridge";
    case Regime::Cascade: return "Cascade";
  }
  return "?";
}

namespace {

double res_scale(const RegimeMGF& m) { return std::max(1.0, m.total_rate()); }

}  // namespace

Vec2 solve_theta_b(const RegimeMGF& m_plus) {
  const double scale = res_scale(m_plus);
  auto profile = [&](double t1) {
    return m_plus.eval(Vec2(t1, vertical_tangent_theta2(m_plus, t1)));
  };

  double lo = 1e-8;
  if (!(profile(lo) < 0.0)) {
    lo = 1e-12;
    if (!(profile(lo) < 0.0))
      throw NoSignChange("theta_b: profile not negative near the origin");
  }
  double hi = 1.0;
  while (profile(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 50.0)
      throw NoSignChange("theta_b: no sign change up to theta1 = 50");
  }

  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (profile(mid) < 0.0 ? lo : hi) = mid;
  }

  // Newton polish; the envelope derivative of the profile is dM+/dtheta1.
  double t1 = 0.5 * (lo + hi);
  double t2 = vertical_tangent_theta2(m_plus, t1);
  for (int it = 0; it < 10; ++it) {
    const double f = m_plus.eval(Vec2(t1, t2));
    if (std::abs(f) <= 1e-13 * scale) break;
    const double df = m_plus.grad(Vec2(t1, t2))[0];
    if (!(df > 0.0)) break;
    t1 -= f / df;
    t2 = vertical_tangent_theta2(m_plus, t1);
  }

  const Vec2 theta(t1, t2);
  if (!(t1 > 0.0) || std::abs(m_plus.eval(theta)) > 1e-10 * scale ||
      std::abs(m_plus.grad(theta)[1]) > 1e-10 * scale)
    throw InternalInconsistency("theta_b: residuals above tolerance");
  return theta;
}

Vec2 solve_theta_j(const NetworkParams& p, const RegimeMGF& m_plus,
                   const Vec2& theta_b) {
  const double l1 = p.lambda1_bar, l2 = p.lambda2_bar;
  const double m1 = p.mu1, m2 = p.mu2, ms = p.mu1_star;
  const double r12 = p.r12, r21 = p.r21, r10 = p.r10(), r20 = p.r20();

  const double a = (ms - m1) * (l2 + l1 * r12) * l1 - l2 * m2 * (l2 * r21 + l1);
  const double b =
      -(ms - m1) * (l2 * ms + ms * l1 * r12 + l2 * l2 + l1 * l1 * r12 +
                    2.0 * l1 * l2 * r12 + l1 * l2 * r10) +
      ms * l2 * m2 * (1.0 - 2.0 * r12 * r21) - ms * l1 * m2 * r12;
  const double c = (ms - m1) * ms * r10 * (l2 + l1 * r12) +
                   ms * ms * m2 * r12 * (r10 + r12 * r20);

  double roots[2];
  int n_roots = 0;
  const double coeff_scale = std::max({std::abs(b), std::abs(c), 1.0});
  if (std::abs(a) <= 1e-14 * coeff_scale) {
    if (b != 0.0) roots[n_roots++] = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      // One root by the standard formula, the other via c/(a*x1), to avoid
      // cancellation when b dominates.
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots[n_roots++] = q / a;
      if (q != 0.0) roots[n_roots++] = c / q;
    }
  }

  const double scale = res_scale(m_plus);
  Vec2 found = theta_b;
  int n_qualified = 0;
  for (int i = 0; i < n_roots; ++i) {
    const double x = roots[i];
    if (!(x > 1.0)) continue;
    const double t1 = std::log(x);
    double t2;
    try {
      t2 = g_minus(p, t1);
    } catch (const OutOfRange&) {
      continue;
    }
    const Vec2 theta(t1, t2);
    if (std::abs(m_plus.eval(theta)) > 1e-10 * scale) continue;
    if (!(m_plus.grad(theta)[1] < -1e-12 * scale)) continue;
    found = theta;
    ++n_qualified;
  }
  if (n_qualified > 1)
    throw AmbiguousRoot("theta_j: both quadratic roots qualify");
  return found;
}

std::optional<Vec2> theta_j_by_arc_tracing(const RegimeMGF& m_plus,
                                           const RegimeMGF& m_minus,
                                           const Vec2& theta_b) {
  const double scale = res_scale(m_plus);
  const double tol = 1e-12 * scale;

  if (!(m_minus.eval(theta_b) > tol)) return std::nullopt;

  auto arc = [&](double t2) {
    return Vec2(rightmost_zero_at_height(m_plus, t2, theta_b[0]), t2);
  };
  auto f = [&](double t2) { return m_minus.eval(arc(t2)); };

  auto qualify = [&](const Vec2& theta) -> std::optional<Vec2> {
    if (!(theta[0] > 1e-12)) return std::nullopt;
    if (!(m_plus.grad(theta)[1] < -1e-12 * scale)) return std::nullopt;
    return theta;
  };

  const int n = 800;
  double t_prev = theta_b[1];
  double f_prev = m_minus.eval(theta_b);
  for (int k = 1; k <= n; ++k) {
    const double t = theta_b[1] * double(n - k) / double(n);
    const double v = f(t);
    if (v <= 0.0) {
      double lo = t, hi = t_prev;  // f(lo) <= 0 < f(hi)
      for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) <= 0.0 ? lo : hi) = mid;
      }
      const Vec2 theta = arc(0.5 * (lo + hi));
      auto q = qualify(theta);
      if (q) return q;
      return std::nullopt;
    }
    t_prev = t;
    f_prev = v;
  }

  // No sign change on the open arc. The curves can still meet exactly at the
  // theta1-axis endpoint (both MGFs agree there for measures that differ
  // only in dy < 0 atoms).
  const Vec2 end = arc(0.0);
  if (end[0] > 1e-12 && std::abs(m_minus.eval(end)) <= 1e-9 * scale)
    return qualify(end);
  return std::nullopt;
}

std::pair<Vec2, double> solve_theta_c(const NetworkParams& p,
                                      const RegimeMGF& m_plus,
                                      const Vec2& theta_b) {
  const TrafficSolution t = solve_traffic(p);
  const bool cond_23 = reversed_conditions(p).second;
  const double lr2 = std::log(1.0 / t.rho2);
  if (!cond_23 || !(lr2 < theta_b[1])) return {theta_b, 0.0};

  const Vec2 theta_c(std::log(1.0 / t.rho1), lr2);
  if (std::abs(m_plus.eval(theta_c)) > 1e-8 * res_scale(m_plus))
    throw InternalInconsistency("theta_c: point not on the level curve");
  const Vec2 v = m_plus.grad(theta_c);
  if (!(v[0] > 0.0) || !(v[1] < 0.0))
    throw InternalInconsistency("theta_c: descent velocity has a wrong sign");
  return {theta_c, -v[1] / v[0]};
}

std::optional<Vec2> y_axis_jitter_point(const RegimeMGF& m_plus,
                                        const RegimeMGF& m_ytilde) {
  const RegimeMGF plus_sw = m_plus.swapped(MgfRole::Interior);
  const RegimeMGF ytilde_sw = m_ytilde.swapped(MgfRole::XBoundary);
  const Vec2 tb_sw = solve_theta_b(plus_sw);
  const auto pt = theta_j_by_arc_tracing(plus_sw, ytilde_sw, tb_sw);
  if (!pt) return std::nullopt;
  return Vec2((*pt)[1], (*pt)[0]);
}

std::optional<std::pair<Vec2, double>> cascade_point_at_height(
    const RegimeMGF& m_plus, double y_cost, const Vec2& theta_b) {
  if (!(y_cost < theta_b[1])) return std::nullopt;
  const double t1 = rightmost_zero_at_height(m_plus, y_cost, theta_b[0]);
  const Vec2 theta(t1, y_cost);
  const Vec2 v = m_plus.grad(theta);
  if (!(v[0] > 0.0) || !(v[1] < 0.0)) return std::nullopt;
  return std::make_pair(theta, -v[1] / v[0]);
}

namespace {

Regime classify_by_heights(double theta_b2, double theta_j2, double y_cost,
                           double tol) {
  if (theta_j2 < std::min(y_cost, theta_b2) - tol) return Regime::Jitter;
  if (y_cost < std::min(theta_j2, theta_b2) - tol) return Regime::Cascade;
  return Regime::Bridge;
}

}  // namespace

Regime classify_regime(const Vec2& theta_b, const Vec2& theta_j,
                       double cascade_height, double rho2, double tol) {
  const Regime r = classify_by_heights(theta_b[1], theta_j[1],
                                       std::log(1.0 / rho2), tol);
  if (r == Regime::Cascade && !(cascade_height > 0.0))
    throw InternalInconsistency("classify_regime: cascade with zero height");
  return r;
}

LDAnalysis assemble_analysis(const RegimeMGF& m_plus, const RegimeMGF& m_minus,
                             const RegimeMGF& m_ytilde, const Vec2& theta_b,
                             const Vec2& theta_j, const Vec2& theta_c,
                             double cascade_height, double y_climb_cost,
                             const TrafficSolution& traffic) {
  constexpr double kTieTol = 1e-9;
  LDAnalysis a;
  a.traffic = traffic;
  a.theta_b = theta_b;
  a.theta_j = theta_j;
  a.theta_c = theta_c;
  a.cascade_height = cascade_height;
  a.y_climb_cost = y_climb_cost;

  a.regime = classify_by_heights(theta_b[1], theta_j[1], y_climb_cost, kTieTol);
  if (a.regime == Regime::Cascade && !(cascade_height > 0.0))
    throw InternalInconsistency("analysis: cascade regime with zero height");

  switch (a.regime) {
    case Regime::Jitter: a.rate = theta_j[0]; break;
    case Regime::Cascade: a.rate = theta_c[0]; break;
    case Regime::Bridge: a.rate = theta_b[0]; break;
  }
  const double min_rate = std::min({theta_b[0], theta_j[0], theta_c[0]});
  if (a.rate > min_rate + 1e-9 * std::max(1.0, std::abs(min_rate)))
    throw InternalInconsistency("analysis: selected rate above family minimum");

  a.v_plus = m_plus.grad(theta_j);
  a.v_minus = m_minus.grad(theta_j);
  if (a.regime == Regime::Jitter) {
    a.beta = a.v_minus[1] / (a.v_minus[1] - a.v_plus[1]);
    if (!(a.beta > 0.0 && a.beta < 1.0))
      throw InternalInconsistency("analysis: jitter beta outside (0,1)");
  } else {
    a.beta = 1.0;
  }

  // Flow ratio of upward against downward atoms of M+ at theta_j; below one
  // exactly when the vertical velocity component there points down.
  double up = 0.0, down = 0.0;
  for (const JumpAtom& atom : m_plus.measure().atoms()) {
    const double w =
        atom.rate * std::exp(theta_j[0] * atom.dx + theta_j[1] * atom.dy);
    if (atom.dy > 0) up += w * atom.dy;
    if (atom.dy < 0) down -= w * atom.dy;
  }
  a.rho = up / down;

  a.cascade_velocity = m_plus.grad(theta_c);

  a.u_interior = theta_b[1];
  const double v1_mix = a.beta * a.v_plus[0] + (1.0 - a.beta) * a.v_minus[0];
  a.u1 = (m_minus.eval(theta_j) - m_plus.eval(theta_j)) / v1_mix;
  a.u2 = theta_j[0] / v1_mix;
  a.u3 = theta_j[1] / v1_mix;

  a.drift_interior = m_plus.grad(Vec2::Zero());
  a.drift_boundary = m_minus.grad(Vec2::Zero());
  a.drift_y_boundary = m_ytilde.grad(Vec2::Zero());
  return a;
}

LDAnalysis analyze(const NetworkParams& p) {
  p.validate();
  const StabilityReport st = classify_stability(p);
  if (st.cls != Stability::Stable)
    throw RejectsUnstable(st.cls == Stability::Transient
                              ? "analyze: network is transient"
                              : "analyze: network sits on the stability boundary");

  const TrafficSolution traffic = solve_traffic(p);
  const RegimeMGF m_plus(interior_jumps(p), MgfRole::Interior);
  const RegimeMGF m_minus(boundary_jumps(p), MgfRole::XBoundary);
  const RegimeMGF m_ytilde(y_boundary_jumps(p), MgfRole::YBoundary);

  const Vec2 theta_b = solve_theta_b(m_plus);
  const Vec2 theta_j = solve_theta_j(p, m_plus, theta_b);
  const auto [theta_c, height] = solve_theta_c(p, m_plus, theta_b);
  const double y_cost = std::log(1.0 / traffic.rho2);
  return assemble_analysis(m_plus, m_minus, m_ytilde, theta_b, theta_j,
                           theta_c, height, y_cost, traffic);
}

FluidPath fluid_path(const LDAnalysis& a) {
  FluidPath path;
  const Vec2 origin(0.0, 0.0);
  const Vec2 exit_point(1.0, 0.0);

  if (a.regime == Regime::Cascade) {
    PathSegment climb{origin, Vec2(0.0, a.cascade_height), std::nullopt,
                      std::nullopt, "climb"};
    path.push_back(climb);
    PathSegment descent{Vec2(0.0, a.cascade_height), exit_point,
                        a.cascade_velocity, std::nullopt, "cascade"};
    path.push_back(descent);
  } else {
    const double v1 = a.beta * a.v_plus[0] + (1.0 - a.beta) * a.v_minus[0];
    PathSegment fwd{origin, exit_point, Vec2(v1, 0.0), a.beta,
                    a.regime == Regime::Jitter ? "jitter" : "bridge"};
    path.push_back(fwd);
  }

  // Natural drift path back to the origin. On the axis the interior and
  // boundary dynamics mix so the vertical component vanishes; if the
  // interior drift points up, the path lifts off, crosses to the y-axis and
  // drains down it.
  const Vec2 dp = a.drift_interior;
  const Vec2 dm = a.drift_boundary;
  if (dp[1] <= 0.0) {
    const double kappa = dm[1] - dp[1] != 0.0 ? -dp[1] / (dm[1] - dp[1]) : 0.0;
    const double vx = kappa * dm[0] + (1.0 - kappa) * dp[0];
    path.push_back({exit_point, origin, Vec2(vx, 0.0), std::nullopt,
                    "return-axis"});
  } else {
    const Vec2 dy_b = a.drift_y_boundary;
    const double lift = dp[0] < 0.0 ? -dp[1] / dp[0] : 0.0;
    const Vec2 wall(0.0, lift);
    path.push_back({exit_point, wall, dp, std::nullopt, "return-interior"});
    const double kap = dy_b[0] - dp[0] != 0.0 ? -dp[0] / (dy_b[0] - dp[0]) : 0.0;
    const double vy = kap * dy_b[1] + (1.0 - kap) * dp[1];
    path.push_back({wall, origin, Vec2(0.0, vy), std::nullopt, "return-y-axis"});
  }
  return path;
}

}  // namespace ldnet
