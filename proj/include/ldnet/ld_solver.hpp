#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldnet/mgf.hpp"

namespace ldnet {

enum class Regime { Jitter, Bridge, Cascade };

const char* to_string(Regime r);

/// Full analytic answer for one model instance: the three candidate twist
/// points, the selected regime and decay rate, and the fluid-path detail.
struct LDAnalysis {
  TrafficSolution traffic;

  Vec2 theta_b;  ///< easternmost point of {M+ = 0}
  Vec2 theta_j;  ///< x-axis jitter point, or theta_b when none qualifies
  Vec2 theta_c;  ///< cascade point, or theta_b when no cascade exists

  double rho;    ///< up/down flow ratio at theta_j; < 1 iff jitter qualifies
  Regime regime;
  double rate;   ///< theta1 of the regime's point; the decay rate per level

  double beta;   ///< time fraction off the boundary; 1 unless Jitter
  Vec2 v_plus;   ///< grad M+ at theta_j
  Vec2 v_minus;  ///< grad M- at theta_j

  double cascade_height;  ///< h >= 0; positive only when a cascade exists
  Vec2 cascade_velocity;  ///< grad M+ at theta_c = (v, -v h)

  double u_interior;      ///< multiplier of the interior problem (= theta_b2)
  double u1, u2, u3;      ///< multipliers of the boundary mixture problem

  Vec2 drift_interior;    ///< grad M+ at the origin
  Vec2 drift_boundary;    ///< grad M- at the origin
  Vec2 drift_y_boundary;  ///< grad of the y-axis boundary MGF at the origin

  double y_climb_cost;    ///< action per unit height of the y-axis jitter
};

/// Easternmost point of the egg {M+ = 0}: the unique theta with theta1 > 0,
/// M+(theta) = 0 and dM+/dtheta2(theta) = 0. Throws NoSignChange when the
/// bracketing search reaches theta1 = 50 without a sign change.
Vec2 solve_theta_b(const RegimeMGF& m_plus);

/// Intersection of {M+ = 0} and {M- = 0} strictly between theta_b and the
/// theta1-axis, via the closed-form quadratic in exp(theta1); falls back to
/// theta_b when no root qualifies. Throws AmbiguousRoot if both roots pass
/// the qualification tests.
Vec2 solve_theta_j(const NetworkParams& p, const RegimeMGF& m_plus,
                   const Vec2& theta_b);

/// Same intersection found without the closed form: walks the lower-right
/// arc of the egg and bisects the sign change of M- along it. Serves as the
/// independent check for solve_theta_j and as the primary method for models
/// with no closed-form quadratic. Returns nullopt when no crossing
/// qualifies (then the jitter point is theta_b).
std::optional<Vec2> theta_j_by_arc_tracing(const RegimeMGF& m_plus,
                                           const RegimeMGF& m_minus,
                                           const Vec2& theta_b);

/// Cascade point and height for the modified Jackson network: the closed
/// form (log rho1^{-1}, log rho2^{-1}) when the reversed condition via the
/// y-axis holds and log(rho2^{-1}) < theta_b2; otherwise (theta_b, 0).
std::pair<Vec2, double> solve_theta_c(const NetworkParams& p,
                                      const RegimeMGF& m_plus,
                                      const Vec2& theta_b);

/// Jitter point on the y-axis for a generic model: axes are swapped and the
/// x-axis arc machinery reused. The returned point (original frame) prices
/// the climb of a cascade at theta2 per unit height.
std::optional<Vec2> y_axis_jitter_point(const RegimeMGF& m_plus,
                                        const RegimeMGF& m_ytilde);

/// Easternmost point of {M+ = 0} at a given height plus the descent slope
/// h = -v2/v1 there. Returns nullopt when the height is not strictly below
/// theta_b2 or the descent velocity fails to point east.
std::optional<std::pair<Vec2, double>> cascade_point_at_height(
    const RegimeMGF& m_plus, double y_cost, const Vec2& theta_b);

/// Regime selection: jitter when theta_j2 clears both other heights, cascade
/// when log(rho2^{-1}) does, bridge otherwise (ties within tol included).
Regime classify_regime(const Vec2& theta_b, const Vec2& theta_j,
                       double cascade_height, double rho2, double tol = 1e-9);

/// Full analysis of a stable modified Jackson network. Throws
/// RejectsUnstable for Transient or Boundary parameters.
LDAnalysis analyze(const NetworkParams& p);

/// Shared assembly used by analyze() and the fork pipeline: classification,
/// rate selection, mixture detail and KKT multipliers, plus the internal
/// consistency checks of the regime theorems.
LDAnalysis assemble_analysis(const RegimeMGF& m_plus, const RegimeMGF& m_minus,
                             const RegimeMGF& m_ytilde, const Vec2& theta_b,
                             const Vec2& theta_j, const Vec2& theta_c,
                             double cascade_height, double y_climb_cost,
                             const TrafficSolution& traffic);

/// One leg of the fluid-scaled overflow path in the unit-scaled plane.
struct PathSegment {
  Vec2 from;
  Vec2 to;
  std::optional<Vec2> velocity;
  std::optional<double> beta;
  std::string label;
};

using FluidPath = std::vector<PathSegment>;

/// Forward overflow path plus the natural drift path back to the origin.
FluidPath fluid_path(const LDAnalysis& a);

}  // namespace ldnet
