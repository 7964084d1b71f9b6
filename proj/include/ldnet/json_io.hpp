#pragma once

#include <string>

#include <json.hpp>

#include "ldnet/ld_solver.hpp"
#include "ldnet/sim.hpp"

namespace ldnet {

using json = nlohmann::json;

/// Strict parse: exactly the keys {lambda1_bar, lambda2_bar, mu1, mu2,
/// mu1_star, r12, r21}, all finite numbers.
NetworkParams network_params_from_json(const json& j);
json to_json(const NetworkParams& p);

/// Strict parse: exactly the keys {nu, lambda, eta, alpha, beta}.
ForkParams fork_params_from_json(const json& j);
json to_json(const ForkParams& p);

json to_json(const LDAnalysis& a);
LDAnalysis analysis_from_json(const json& j);

json to_json(const SimEstimate& e);
json to_json(const TailEstimate& e);

Regime regime_from_string(const std::string& s);

/// CSV with one row per level: level, p, ci, boundary_fraction, bf_ci, hits.
std::string sim_csv(const SimEstimate& e);

/// CSV of the polyline, two rows per segment (endpoints), annotated with
/// the segment velocity and beta where present.
std::string path_csv(const FluidPath& path);

/// All floats rendered with 17 significant digits.
std::string format_double(double v);

}  // namespace ldnet
