#pragma once

#include "ldnet/jump_measure.hpp"
#include "ldnet/network.hpp"

namespace ldnet {

/// Which piece of the flat-boundary decomposition a measure describes.
enum class MgfRole { Interior, XBoundary, YBoundary };

/// Log moment generating function M(theta) = sum rate*(exp(theta.delta) - 1)
/// of a compound Poisson jump measure, with exact gradient and Hessian.
///
/// Construction enforces the steepness the role requires: the interior
/// measure must have atoms on all four half-axes, a boundary measure on all
/// but the one pointing into its wall. Exponents above `kMaxExponent` raise
/// MgfOverflow so downstream Newton steps always see finite values.
class RegimeMGF {
 public:
  static constexpr double kMaxExponent = 700.0;

  RegimeMGF(JumpMeasure measure, MgfRole role);

  double eval(const Vec2& theta) const;
  Vec2 grad(const Vec2& theta) const;
  Mat2 hessian(const Vec2& theta) const;

  const JumpMeasure& measure() const { return measure_; }
  MgfRole role() const { return role_; }
  double total_rate() const { return measure_.total_rate(); }

  /// Same measure with axes exchanged, re-tagged with `role`.
  RegimeMGF swapped(MgfRole role) const { return {measure_.swapped(), role}; }

 private:
  JumpMeasure measure_;
  MgfRole role_;
};

/// Unique theta2 with dM/dtheta2(theta1, theta2) = 0; the height at which
/// the vertical line theta1 = const is tangent to a level curve of M.
/// Requires atoms with dy > 0 and dy < 0 (throws NonSteep otherwise).
double vertical_tangent_theta2(const RegimeMGF& m, double theta1);

/// theta1 solving dM/dtheta1(theta1, theta2) = 0 at fixed theta2.
double horizontal_tangent_theta1(const RegimeMGF& m, double theta2);

/// Easternmost solution theta1 of M(theta1, theta2) = 0 at a fixed height
/// theta2, given an upper bound `hi` known to satisfy M(hi, theta2) >= 0.
/// Throws OutOfRange if the horizontal line misses the level set.
double rightmost_zero_at_height(const RegimeMGF& m, double theta2, double hi);

/// Height of the {M- = 0} level curve over theta1, solved from the closed
/// form of the boundary MGF. Throws OutOfRange when theta1 lies outside the
/// span of the curve.
double g_minus(const NetworkParams& p, double theta1);

/// Some strictly positive point with M(theta) < 0; exists for every stable
/// interior measure. Used to witness positivity of the local rate function.
Vec2 theta_hat(const RegimeMGF& m_plus);

}  // namespace ldnet
