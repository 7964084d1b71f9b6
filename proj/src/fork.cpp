#include "ldnet/fork.hpp"

#include <cmath>
#include <limits>

#include "ldnet/errors.hpp"

namespace ldnet {

void ForkParams::validate() const {
  const double vals[] = {nu, lambda, eta, alpha, beta_rate};
  for (double v : vals)
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidParams("fork params: all rates must be finite and >= 0");
  if (alpha <= 0.0 || beta_rate <= 0.0)
    throw InvalidParams("fork params: service rates must be > 0");
  if (nu + lambda <= 0.0 || nu + eta <= 0.0)
    throw DegenerateNetwork("fork params: each queue needs a positive arrival rate");
}

std::pair<JumpMeasure, JumpMeasure> fork_jumps(const ForkParams& p) {
  JumpMeasure interior({{+1, +1, p.nu},
                        {+1, 0, p.lambda},
                        {0, +1, p.eta},
                        {-1, 0, p.alpha},
                        {0, -1, p.beta_rate}});
  JumpMeasure boundary({{+1, +1, p.nu},
                        {+1, 0, p.lambda},
                        {0, +1, p.eta},
                        {-1, 0, p.alpha}});
  return {std::move(interior), std::move(boundary)};
}

JumpMeasure fork_y_boundary(const ForkParams& p) {
  return JumpMeasure({{+1, +1, p.nu},
                      {+1, 0, p.lambda},
                      {0, +1, p.eta},
                      {0, -1, p.beta_rate}});
}

bool fork_stable(const ForkParams& p) {
  return p.lambda + p.nu < p.alpha && p.eta + p.nu < p.beta_rate;
}

LDAnalysis fork_analyze(const ForkParams& p) {
  p.validate();
  if (!fork_stable(p))
    throw RejectsUnstable("fork_analyze: fork network is not stable");

  auto [interior, boundary] = fork_jumps(p);
  const RegimeMGF m_plus(std::move(interior), MgfRole::Interior);
  const RegimeMGF m_minus(std::move(boundary), MgfRole::XBoundary);
  const RegimeMGF m_ytilde(fork_y_boundary(p), MgfRole::YBoundary);

  const Vec2 theta_b = solve_theta_b(m_plus);
  const Vec2 theta_j =
      theta_j_by_arc_tracing(m_plus, m_minus, theta_b).value_or(theta_b);

  // Climb cost per unit height from the y-axis jitter point; when no such
  // point qualifies a cascade can never win and the cost is infinite.
  double y_cost = std::numeric_limits<double>::infinity();
  Vec2 theta_c = theta_b;
  double height = 0.0;
  if (const auto ytilde = y_axis_jitter_point(m_plus, m_ytilde)) {
    y_cost = (*ytilde)[1];
    if (const auto cascade = cascade_point_at_height(m_plus, y_cost, theta_b)) {
      theta_c = cascade->first;
      height = cascade->second;
    }
  }

  TrafficSolution traffic;
  traffic.lambda1 = p.lambda + p.nu;
  traffic.lambda2 = p.eta + p.nu;
  traffic.rho1 = traffic.lambda1 / p.alpha;
  traffic.rho2 = traffic.lambda2 / p.beta_rate;

  return assemble_analysis(m_plus, m_minus, m_ytilde, theta_b, theta_j,
                           theta_c, height, y_cost, traffic);
}

}  // namespace ldnet
