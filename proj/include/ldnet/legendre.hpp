#pragma once

#include <vector>

#include "ldnet/mgf.hpp"

namespace ldnet {

/// Legendre transform at one velocity: the twist theta solving
/// grad M(theta) = v and the action value theta.v - M(theta).
struct LegendreResult {
  Vec2 v;
  Vec2 theta;
  double value;
  int iterations;
};

/// Damped Newton inversion of the gradient map. Throws Unattainable when v
/// lies outside the velocity cone of the measure (infinite action) and
/// NonConverged after 100 iterations without reaching tolerance.
LegendreResult legendre(const RegimeMGF& m, const Vec2& v);

/// Minimum of Lambda+(v1, v2)/v1 over v1 > 0, v2 >= 0: the cheapest path
/// through the interior per unit of x-progress.
struct InteriorMin {
  double value;
  Vec2 v;
  Vec2 theta;
  bool multiplicity_warning;
  std::vector<Vec2> other_minima;
};

InteriorMin min_interior_action(const RegimeMGF& m_plus);

/// Minimum of the boundary mixture action (beta Lambda+(v+) +
/// (1-beta) Lambda-(v-))/v1 under beta v+ + (1-beta) v- = (v1, 0).
struct MixtureMin {
  double value;
  double beta;
  Vec2 v_plus;
  Vec2 v_minus;  ///< zero placeholder when beta = 1
  bool multiplicity_warning;
};

MixtureMin min_mixture_action(const RegimeMGF& m_plus,
                              const RegimeMGF& m_minus);

/// Minimum of h*y_cost + Lambda+(v, -v h)/v over h >= 0, v > 0: the
/// cheapest climb-then-descend path.
struct CascadeMin {
  double value;
  double h;
  double v;
  bool multiplicity_warning;
};

CascadeMin min_cascade_action(const RegimeMGF& m_plus, double rho2);

/// Same with the climb priced explicitly (used by models whose climb cost
/// is not log(rho2^{-1})).
CascadeMin min_cascade_action_cost(const RegimeMGF& m_plus, double y_cost);

/// Scaled residuals of the optimality systems at a candidate argmin; each
/// returns the largest violation so tests can assert a single bound.
double kkt_residual_interior(const RegimeMGF& m_plus, const Vec2& v);
double kkt_residual_mixture(const RegimeMGF& m_plus, const RegimeMGF& m_minus,
                            double beta, const Vec2& v_plus,
                            const Vec2& v_minus);
double kkt_residual_cascade(const RegimeMGF& m_plus, double y_cost, double h,
                            double v);

}  // namespace ldnet
