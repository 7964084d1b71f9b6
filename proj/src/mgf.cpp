#include "ldnet/mgf.hpp"

#include <cmath>
#include <limits>

#include "ldnet/errors.hpp"

namespace ldnet {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw NonSteep(what);
}

}  // namespace

RegimeMGF::RegimeMGF(JumpMeasure measure, MgfRole role)
    : measure_(std::move(measure)), role_(role) {
  switch (role_) {
    case MgfRole::Interior:
      require(measure_.has_positive_dx() && measure_.has_negative_dx() &&
                  measure_.has_positive_dy() && measure_.has_negative_dy(),
              "interior measure must have atoms on all four half-axes");
      break;
    case MgfRole::XBoundary:
      require(measure_.has_positive_dx() && measure_.has_negative_dx() &&
                  measure_.has_positive_dy(),
              "x-boundary measure must span +x, -x and +y");
      break;
    case MgfRole::YBoundary:
      require(measure_.has_positive_dy() && measure_.has_negative_dy() &&
                  measure_.has_positive_dx(),
              "y-boundary measure must span +y, -y and +x");
      break;
  }
}

double RegimeMGF::eval(const Vec2& theta) const {
  double m = 0.0;
  for (const JumpAtom& a : measure_.atoms()) {
    const double e = theta[0] * a.dx + theta[1] * a.dy;
    if (e > kMaxExponent) throw MgfOverflow("mgf eval: exponent above 700");
    m += a.rate * std::expm1(e);
  }
  return m;
}

Vec2 RegimeMGF::grad(const Vec2& theta) const {
  Vec2 g = Vec2::Zero();
  for (const JumpAtom& a : measure_.atoms()) {
    const double e = theta[0] * a.dx + theta[1] * a.dy;
    if (e > kMaxExponent) throw MgfOverflow("mgf grad: exponent above 700");
    const double w = a.rate * std::exp(e);
    g[0] += w * a.dx;
    g[1] += w * a.dy;
  }
  return g;
}

Mat2 RegimeMGF::hessian(const Vec2& theta) const {
  Mat2 h = Mat2::Zero();
  for (const JumpAtom& a : measure_.atoms()) {
    const double e = theta[0] * a.dx + theta[1] * a.dy;
    if (e > kMaxExponent) throw MgfOverflow("mgf hessian: exponent above 700");
    const double w = a.rate * std::exp(e);
    h(0, 0) += w * a.dx * a.dx;
    h(0, 1) += w * a.dx * a.dy;
    h(1, 1) += w * a.dy * a.dy;
  }
  h(1, 0) = h(0, 1);
  return h;
}

namespace {

// Partial derivative of M along one axis plus the same sum with all terms
// taken in absolute value; the latter sets the convergence scale.
struct AxisSlope {
  double value;
  double scale;
};

AxisSlope axis_slope(const RegimeMGF& m, const Vec2& theta, int axis) {
  AxisSlope s{0.0, 0.0};
  for (const JumpAtom& a : m.measure().atoms()) {
    const double e = theta[0] * a.dx + theta[1] * a.dy;
    if (e > RegimeMGF::kMaxExponent)
      throw MgfOverflow("mgf slope: exponent above 700");
    const int d = axis == 0 ? a.dx : a.dy;
    const double w = a.rate * std::exp(e) * d;
    s.value += w;
    s.scale += std::abs(w);
  }
  return s;
}

// Root of the strictly increasing map t -> dM/dtheta(axis) with the other
// coordinate held fixed. Bracket by doubling, then bisection with Newton
// polish.
double tangent_root(const RegimeMGF& m, double fixed, int axis) {
  auto point = [&](double t) {
    return axis == 1 ? Vec2(fixed, t) : Vec2(t, fixed);
  };
  auto slope = [&](double t) { return axis_slope(m, point(t), axis); };

  double lo = -1.0, hi = 1.0;
  while (slope(lo).value > 0.0) {
    lo *= 2.0;
    if (lo < -500.0) throw NoSignChange("tangent root: lower bracket exhausted");
  }
  while (slope(hi).value < 0.0) {
    hi *= 2.0;
    if (hi > 500.0) throw NoSignChange("tangent root: upper bracket exhausted");
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const AxisSlope f = slope(t);
    if (std::abs(f.value) <= 1e-14 * f.scale) return t;
    if (f.value > 0.0)
      hi = t;
    else
      lo = t;
    // Newton step on the monotone slope; curvature is the diagonal Hessian.
    const double curv = m.hessian(point(t))(axis, axis);
    double next = t - f.value / curv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * (1.0 + std::abs(t))) return next;
    t = next;
  }
  return t;
}

}  // namespace

double vertical_tangent_theta2(const RegimeMGF& m, double theta1) {
  if (!(m.measure().has_positive_dy() && m.measure().has_negative_dy()))
    throw NonSteep("vertical tangent: measure needs dy > 0 and dy < 0 atoms");
  return tangent_root(m, theta1, 1);
}

double horizontal_tangent_theta1(const RegimeMGF& m, double theta2) {
  if (!(m.measure().has_positive_dx() && m.measure().has_negative_dx()))
    throw NonSteep("horizontal tangent: measure needs dx > 0 and dx < 0 atoms");
  return tangent_root(m, theta2, 0);
}

double rightmost_zero_at_height(const RegimeMGF& m, double theta2, double hi) {
  const double scale = m.total_rate();
  const double t_min = horizontal_tangent_theta1(m, theta2);
  const double at_min = m.eval(Vec2(t_min, theta2));
  if (at_min > 1e-12 * scale)
    throw OutOfRange("rightmost zero: horizontal line misses the level set");
  if (at_min >= 0.0) return t_min;
  double lo = t_min;
  if (m.eval(Vec2(hi, theta2)) < 0.0)
    throw OutOfRange("rightmost zero: upper bound is inside the level set");
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = m.eval(Vec2(t, theta2));
    if (std::abs(f) <= 1e-14 * scale && it > 0) return t;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    const double df = m.grad(Vec2(t, theta2))[0];
    double next = df > 0.0 ? t - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * (1.0 + std::abs(t))) return next;
    t = next;
  }
  return t;
}

double g_minus(const NetworkParams& p, double theta1) {
  const double num = p.lambda1_bar + p.lambda2_bar + p.mu1_star -
                     p.lambda1_bar * std::exp(theta1) -
                     p.mu1_star * p.r10() * std::exp(-theta1);
  const double den = p.lambda2_bar + p.mu1_star * p.r12 * std::exp(-theta1);
  if (!(den > 0.0))
    throw OutOfRange("g_minus: denominator must be positive");
  if (!(num > 0.0))
    throw OutOfRange("g_minus: theta1 outside the span of the level curve");
  return std::log(num / den);
}

Vec2 theta_hat(const RegimeMGF& m_plus) {
  const Vec2 g0 = m_plus.grad(Vec2::Zero());
  Vec2 dirs[4] = {-g0, Vec2(1.0, 1.0), Vec2(1e-3, 1.0), Vec2(1e-6, 1.0)};
  for (Vec2 dir : dirs) {
    if (!(dir[0] > 0.0 && dir[1] > 0.0)) continue;
    dir.normalize();
    if (g0.dot(dir) >= 0.0) continue;
    Vec2 best = Vec2::Zero();
    double best_val = 0.0;
    for (double t = 1e-4; t <= 64.0; t *= 1.5) {
      const Vec2 cand = t * dir;
      double val;
      try {
        val = m_plus.eval(cand);
      } catch (const MgfOverflow&) {
        break;
      }
      if (val < best_val) {
        best_val = val;
        best = cand;
      }
    }
    if (best_val < 0.0) return best;
  }
  throw InternalInconsistency("theta_hat: no interior point with M < 0 found");
}

}  // namespace ldnet
