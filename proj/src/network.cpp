#include "ldnet/network.hpp"

#include <cmath>

#include "ldnet/errors.hpp"

namespace ldnet {

void NetworkParams::validate() const {
  const double vals[] = {lambda1_bar, lambda2_bar, mu1, mu2, mu1_star, r12, r21};
  for (double v : vals)
    if (!std::isfinite(v)) throw InvalidParams("network params: all values must be finite");
  if (lambda1_bar < 0.0 || lambda2_bar < 0.0)
    throw InvalidParams("network params: arrival rates must be >= 0");
  if (mu1 <= 0.0 || mu2 <= 0.0)
    throw InvalidParams("network params: service rates must be > 0");
  if (mu1_star < mu1)
    throw InvalidParams("network params: mu1_star must be >= mu1");
  if (r12 < 0.0 || r12 > 1.0 || r21 < 0.0 || r21 > 1.0)
    throw InvalidParams("network params: routing probabilities must lie in [0,1]");
  if (r12 * r21 >= 1.0)
    throw InvalidParams("network params: r12*r21 must be < 1 (open network)");
  solve_traffic(*this);  // throws DegenerateNetwork on a vanishing throughput
}

TrafficSolution solve_traffic(const NetworkParams& p) {
  const double denom = 1.0 - p.r12 * p.r21;
  const double l1 = (p.lambda1_bar + p.lambda2_bar * p.r21) / denom;
  const double l2 = (p.lambda2_bar + p.lambda1_bar * p.r12) / denom;
  if (l1 <= 0.0 || l2 <= 0.0)
    throw DegenerateNetwork("traffic equations: throughputs must be positive");
  return {l1, l2, l1 / p.mu1, l2 / p.mu2};
}

StabilityReport classify_stability(const NetworkParams& p, double tol) {
  const TrafficSolution t = solve_traffic(p);

  // Saturated-regime drift of the node-1 count per node-2 busy cycle.
  const double d_busy = (p.lambda1_bar + p.mu2 * p.r21 - p.mu1) /
                        (p.mu2 - (p.lambda2_bar + p.mu1 * p.r12));
  const double d_idle = (p.lambda1_bar - p.mu1_star) /
                        (p.lambda2_bar + p.mu1_star * p.r12);
  const double drift = d_busy + d_idle;

  const double threshold = t.rho2 * p.mu1 + (1.0 - t.rho2) * p.mu1_star;
  const double band2 = tol * std::max(t.lambda2, p.mu2);
  const double band1 = tol * std::max(t.lambda1, std::abs(threshold));

  if (std::abs(t.lambda2 - p.mu2) <= band2 ||
      std::abs(t.lambda1 - threshold) <= band1)
    return {Stability::Boundary, drift};
  if (t.lambda2 < p.mu2 && t.lambda1 < threshold)
    return {Stability::Stable, drift};
  return {Stability::Transient, drift};
}

JumpMeasure interior_jumps(const NetworkParams& p) {
  return JumpMeasure({{+1, 0, p.lambda1_bar},
                      {0, +1, p.lambda2_bar},
                      {-1, 0, p.mu1 * p.r10()},
                      {-1, +1, p.mu1 * p.r12},
                      {0, -1, p.mu2 * p.r20()},
                      {+1, -1, p.mu2 * p.r21}});
}

JumpMeasure boundary_jumps(const NetworkParams& p) {
  return JumpMeasure({{+1, 0, p.lambda1_bar},
                      {0, +1, p.lambda2_bar},
                      {-1, 0, p.mu1_star * p.r10()},
                      {-1, +1, p.mu1_star * p.r12}});
}

JumpMeasure y_boundary_jumps(const NetworkParams& p) {
  return JumpMeasure({{+1, 0, p.lambda1_bar},
                      {0, +1, p.lambda2_bar},
                      {0, -1, p.mu2 * p.r20()},
                      {+1, -1, p.mu2 * p.r21}});
}

std::pair<bool, bool> reversed_conditions(const NetworkParams& p) {
  const TrafficSolution t = solve_traffic(p);
  const bool via_x = 1.0 / t.rho2 > p.r20() + p.r21 / t.rho1;
  const bool via_y = 1.0 / t.rho1 > p.r10() + p.r12 / t.rho2;
  return {via_x, via_y};
}

}  // namespace ldnet
