#pragma once

#include <utility>

#include "ldnet/jump_measure.hpp"

namespace ldnet {

/// Rates and routing probabilities of the two-node modified Jackson network.
/// Node 2, when idle, joins node 1 and lifts its service rate from mu1 to
/// mu1_star. The complements r10 = 1 - r12 and r20 = 1 - r21 are derived.
struct NetworkParams {
  double lambda1_bar;  ///< exogenous arrival rate at node 1
  double lambda2_bar;  ///< exogenous arrival rate at node 2
  double mu1;          ///< node-1 service rate, node 2 busy
  double mu2;          ///< node-2 service rate
  double mu1_star;     ///< combined node-1 service rate, node 2 idle
  double r12;          ///< routing probability node 1 -> node 2
  double r21;          ///< routing probability node 2 -> node 1

  double r10() const { return 1.0 - r12; }
  double r20() const { return 1.0 - r21; }

  /// Throws InvalidParams unless all invariants hold (rates finite and
  /// nonnegative, mu1, mu2 > 0, mu1_star >= mu1, routings in [0,1] with
  /// r12*r21 < 1) and DegenerateNetwork if a solved throughput vanishes.
  void validate() const;
};

/// Solved throughputs and utilizations of the traffic equations.
struct TrafficSolution {
  double lambda1;
  double lambda2;
  double rho1;  ///< lambda1 / mu1
  double rho2;  ///< lambda2 / mu2
};

enum class Stability { Stable, Transient, Boundary };

struct StabilityReport {
  Stability cls;
  /// Mean change of the node-1 count per node-2 busy cycle in the saturated
  /// regime; negative for stable parameters when the expression is valid.
  double drift;
};

/// Closed-form solution of the traffic equations.
TrafficSolution solve_traffic(const NetworkParams& p);

/// Stable iff lambda2 < mu2 and lambda1 < rho2*mu1 + (1-rho2)*mu1_star,
/// both with relative margin above `tol`; comparisons inside the band
/// report Boundary.
StabilityReport classify_stability(const NetworkParams& p, double tol = 1e-9);

/// Jump measure away from the x-axis (node 2 busy).
JumpMeasure interior_jumps(const NetworkParams& p);

/// Jump measure on the x-axis (node 2 idle, combined service effort).
JumpMeasure boundary_jumps(const NetworkParams& p);

/// Jump measure on the y-axis (node 1 empty, no node-1 service).
JumpMeasure y_boundary_jumps(const NetworkParams& p);

/// Evaluates the reversed-process drift conditions: first component is
/// rho2^{-1} > r20 + r21*rho1^{-1}, second is rho1^{-1} > r10 + r12*rho2^{-1}.
/// Equality counts as failing (strict comparisons).
std::pair<bool, bool> reversed_conditions(const NetworkParams& p);

}  // namespace ldnet
