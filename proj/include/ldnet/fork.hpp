#pragma once

#include <utility>

#include "ldnet/ld_solver.hpp"

namespace ldnet {

/// Fork network: couples arrive at rate nu and join both queues at once;
/// singles arrive at rates lambda (queue 1) and eta (queue 2); the servers
/// work at alpha and beta_rate. Queue 1 is the one whose overflow we study.
struct ForkParams {
  double nu;
  double lambda;
  double eta;
  double alpha;
  double beta_rate;

  void validate() const;
};

/// Interior and x-boundary jump measures. The only boundary effect is the
/// idle queue-2 server: the (0,-1) atom disappears; rates do not change.
std::pair<JumpMeasure, JumpMeasure> fork_jumps(const ForkParams& p);

/// Jump measure on the y-axis (queue 1 empty).
JumpMeasure fork_y_boundary(const ForkParams& p);

/// Standard fork-network stability: lambda + nu < alpha and
/// eta + nu < beta_rate.
bool fork_stable(const ForkParams& p);

/// Generic flat-boundary analysis of the fork network: theta_b by the
/// vertical-tangent search, theta_j by arc tracing (no closed-form
/// quadratic exists here), the cascade candidate priced by the generic
/// y-axis jitter point.
LDAnalysis fork_analyze(const ForkParams& p);

}  // namespace ldnet
