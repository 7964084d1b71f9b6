#include "ldnet/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ldnet/errors.hpp"

namespace ldnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_cone(const JumpMeasure& m, const Vec2& v) {
  if (!m.has_negative_dy() && v[1] <= 0.0)
    throw Unattainable("legendre: v2 <= 0 with no downward atoms");
  if (!m.has_positive_dy() && v[1] >= 0.0)
    throw Unattainable("legendre: v2 >= 0 with no upward atoms");
  if (!m.has_negative_dx() && v[0] <= 0.0)
    throw Unattainable("legendre: v1 <= 0 with no leftward atoms");
  if (!m.has_positive_dx() && v[0] >= 0.0)
    throw Unattainable("legendre: v1 >= 0 with no rightward atoms");
}

}  // namespace

LegendreResult legendre(const RegimeMGF& m, const Vec2& v) {
  check_cone(m.measure(), v);
  const double tol = 1e-12 * std::max(1.0, v.lpNorm<Eigen::Infinity>());

  Vec2 theta = Vec2::Zero();
  Vec2 res = v - m.grad(theta);
  for (int it = 1; it <= 100; ++it) {
    if (res.lpNorm<Eigen::Infinity>() <= tol)
      return {v, theta, theta.dot(v) - m.eval(theta), it};
    const Vec2 step = m.hessian(theta).ldlt().solve(res);
    double s = 1.0;
    for (int half = 0; half < 60; ++half) {
      const Vec2 cand = theta + s * step;
      try {
        const Vec2 cand_res = v - m.grad(cand);
        if (cand_res.norm() < res.norm()) {
          theta = cand;
          res = cand_res;
          break;
        }
      } catch (const MgfOverflow&) {
        // step left the representable range; shorten it
      }
      s *= 0.5;
      if (half == 59)
        throw NonConverged("legendre: damping failed to reduce the residual");
    }
  }
  throw NonConverged("legendre: no convergence in 100 iterations");
}

namespace {

// Action per unit x-progress of a pure interior path, +inf outside the cone.
double interior_objective(const RegimeMGF& m, const Vec2& v) {
  if (!(v[0] > 0.0)) return kInf;
  try {
    return legendre(m, v).value / v[0];
  } catch (const Unattainable&) {
    return kInf;
  } catch (const NonConverged&) {
    return kInf;
  }
}

// Compass search with shrinking steps; `project` clamps iterates into the
// feasible set. Deterministic: directions probed in a fixed order.
template <int N>
void compass_refine(std::function<double(const Eigen::Matrix<double, N, 1>&)> f,
                    Eigen::Matrix<double, N, 1>& x, double& fx,
                    Eigen::Matrix<double, N, 1> step,
                    const Eigen::Matrix<double, N, 1>& step_floor,
                    std::function<void(Eigen::Matrix<double, N, 1>&)> project) {
  using VecN = Eigen::Matrix<double, N, 1>;
  for (int iter = 0; iter < 4000; ++iter) {
    bool improved = false;
    for (int i = 0; i < N; ++i) {
      for (double sgn : {+1.0, -1.0}) {
        VecN cand = x;
        cand[i] += sgn * step[i];
        project(cand);
        const double fc = f(cand);
        if (fc < fx) {
          x = cand;
          fx = fc;
          improved = true;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      bool all_done = true;
      for (int i = 0; i < N; ++i)
        if (step[i] > step_floor[i]) all_done = false;
      if (all_done) return;
    }
  }
}

}  // namespace

InteriorMin min_interior_action(const RegimeMGF& m_plus) {
  const double R = m_plus.total_rate();
  const int n = 200;

  std::vector<double> v1s(n), v2s(n);
  for (int i = 0; i < n; ++i)
    v1s[i] = 1e-3 * R * std::pow(1e4, double(i) / (n - 1));
  v2s[0] = 0.0;
  for (int i = 1; i < n; ++i)
    v2s[i] = 1e-4 * R * std::pow(1e5, double(i - 1) / (n - 2));

  auto f = [&](const Vec2& v) { return interior_objective(m_plus, v); };

  // Coarse stage: remember the few best cells, not just the winner, so
  // distinct basins can be reported.
  std::vector<std::pair<double, Vec2>> best_cells;
  for (double v1 : v1s)
    for (double v2 : v2s) {
      const double val = f(Vec2(v1, v2));
      if (val == kInf) continue;
      best_cells.emplace_back(val, Vec2(v1, v2));
    }
  std::sort(best_cells.begin(), best_cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (best_cells.empty())
    throw InternalInconsistency("interior action: objective infinite everywhere");
  best_cells.resize(std::min<std::size_t>(best_cells.size(), 5));

  auto project = [&](Vec2& x) {
    x[0] = std::max(x[0], 1e-9 * R);
    x[1] = std::max(x[1], 0.0);
  };
  std::vector<std::pair<double, Vec2>> refined;
  for (auto& [val, v0] : best_cells) {
    Vec2 x = v0;
    double fx = val;
    compass_refine<2>(f, x, fx, Vec2(0.05 * R, 0.05 * R),
                      Vec2(1e-8 * R, 1e-8 * R), project);
    refined.emplace_back(fx, x);
  }
  std::sort(refined.begin(), refined.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  InteriorMin out;
  out.value = refined[0].first;
  out.v = refined[0].second;
  out.theta = legendre(m_plus, out.v).theta;
  out.multiplicity_warning = false;
  for (std::size_t i = 1; i < refined.size(); ++i) {
    if ((refined[i].second - out.v).norm() > 1e-3 * R &&
        refined[i].first <= out.value + 1e-5 * (1.0 + std::abs(out.value))) {
      out.multiplicity_warning = true;
      out.other_minima.push_back(refined[i].second);
    }
  }
  return out;
}

namespace {

// Mixture coordinates: (beta, v1+, v2+, v1-); v2- is fixed by the vertical
// balance and v1 by the horizontal one.
struct MixtureEval {
  const RegimeMGF& mp;
  const RegimeMGF& mm;
  double R;

  double operator()(const Eigen::Matrix<double, 4, 1>& q) const {
    const double beta = q[0];
    if (!(beta > 0.0 && beta < 1.0)) return kInf;
    const Vec2 vp(q[1], q[2]);
    if (!(vp[1] < 0.0)) return kInf;
    const Vec2 vm(q[3], -beta * vp[1] / (1.0 - beta));
    const double v1 = beta * vp[0] + (1.0 - beta) * vm[0];
    if (!(v1 > 1e-12 * R)) return kInf;
    try {
      const double lp = legendre(mp, vp).value;
      const double lm = legendre(mm, vm).value;
      return (beta * lp + (1.0 - beta) * lm) / v1;
    } catch (const Unattainable&) {
      return kInf;
    } catch (const NonConverged&) {
      return kInf;
    }
  }
};

// Pure bridge candidate: all time above the axis with zero vertical speed.
std::pair<double, double> bridge_candidate(const RegimeMGF& m_plus) {
  const double R = m_plus.total_rate();
  auto f = [&](double v1) { return interior_objective(m_plus, Vec2(v1, 0.0)); };
  double best_v = 0.0, best = kInf;
  for (int i = 0; i < 400; ++i) {
    const double v1 = 1e-3 * R * std::pow(1e4, double(i) / 399);
    const double val = f(v1);
    if (val < best) {
      best = val;
      best_v = v1;
    }
  }
  double step = 0.05 * R;
  while (step > 1e-9 * R) {
    bool moved = false;
    for (double sgn : {+1.0, -1.0}) {
      const double cand = std::max(best_v + sgn * step, 1e-9 * R);
      const double val = f(cand);
      if (val < best) {
        best = val;
        best_v = cand;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {best, best_v};
}

}  // namespace

MixtureMin min_mixture_action(const RegimeMGF& m_plus,
                              const RegimeMGF& m_minus) {
  using Vec4 = Eigen::Matrix<double, 4, 1>;
  const double R = m_plus.total_rate();
  const MixtureEval f{m_plus, m_minus, R};

  const auto [bridge_value, bridge_v1] = bridge_candidate(m_plus);

  // Outer grid over beta and the direction of v+; inner over the two speeds.
  std::vector<std::pair<double, Vec4>> cells;
  const int nb = 28, nphi = 36, ns = 16, nw = 18;
  for (int ib = 0; ib < nb; ++ib) {
    const double beta = (ib + 0.5) / nb;
    for (int ip = 0; ip < nphi; ++ip) {
      const double phi = -M_PI * (ip + 0.5) / nphi;  // lower half plane
      double cell_best = kInf;
      Vec4 cell_arg;
      for (int is = 0; is < ns; ++is) {
        const double s = 1e-2 * R * std::pow(1e3, double(is) / (ns - 1));
        for (int iw = 0; iw < nw; ++iw) {
          const double w = (-2.0 + 12.0 * double(iw) / (nw - 1)) * R;
          Vec4 q;
          q << beta, s * std::cos(phi), s * std::sin(phi), w;
          const double val = f(q);
          if (val < cell_best) {
            cell_best = val;
            cell_arg = q;
          }
        }
      }
      if (cell_best < kInf) cells.emplace_back(cell_best, cell_arg);
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  auto project = [&](Vec4& q) {
    q[0] = std::clamp(q[0], 1e-7, 1.0 - 1e-12);
    q[2] = std::min(q[2], -1e-12 * R);
  };

  MixtureMin out;
  out.value = bridge_value;
  out.beta = 1.0;
  out.v_plus = Vec2(bridge_v1, 0.0);
  out.v_minus = Vec2::Zero();
  out.multiplicity_warning = false;

  std::vector<std::pair<double, Vec4>> refined;
  const std::size_t n_starts = std::min<std::size_t>(cells.size(), 4);
  for (std::size_t i = 0; i < n_starts; ++i) {
    Vec4 q = cells[i].second;
    double fq = cells[i].first;
    Vec4 step, floor_;
    step << 0.05, 0.05 * R, 0.05 * R, 0.05 * R;
    floor_ << 1e-8, 1e-8 * R, 1e-8 * R, 1e-8 * R;
    compass_refine<4>(f, q, fq, step, floor_, project);
    refined.emplace_back(fq, q);
  }
  std::sort(refined.begin(), refined.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  if (!refined.empty() && refined[0].first < out.value) {
    const Vec4& q = refined[0].second;
    out.value = refined[0].first;
    out.beta = q[0];
    out.v_plus = Vec2(q[1], q[2]);
    out.v_minus = Vec2(q[3], -q[0] * q[2] / (1.0 - q[0]));
  }
  for (std::size_t i = 1; i < refined.size(); ++i) {
    if (refined[i].first <= out.value + 1e-5 * (1.0 + std::abs(out.value)) &&
        std::abs(refined[i].second[0] - out.beta) > 1e-3)
      out.multiplicity_warning = true;
  }
  return out;
}

CascadeMin min_cascade_action_cost(const RegimeMGF& m_plus, double y_cost) {
  const double R = m_plus.total_rate();
  auto f = [&](const Vec2& q) {  // q = (h, v)
    if (!(q[0] >= 0.0) || !(q[1] > 0.0)) return kInf;
    const double act = interior_objective(m_plus, Vec2(q[1], -q[1] * q[0]));
    const double climb = q[0] == 0.0 ? 0.0 : q[0] * y_cost;  // h=0 costs nothing
    return act == kInf ? kInf : climb + act;
  };

  double best = kInf;
  Vec2 arg(0.0, R);
  const int n = 200;
  for (int ih = 0; ih < n; ++ih) {
    const double h = 25.0 * ih / (n - 1);
    for (int iv = 0; iv < n; ++iv) {
      const double v = 1e-3 * R * std::pow(1e4, double(iv) / (n - 1));
      const double val = f(Vec2(h, v));
      if (val < best) {
        best = val;
        arg = Vec2(h, v);
      }
    }
  }
  auto project = [&](Vec2& q) {
    q[0] = std::max(q[0], 0.0);
    q[1] = std::max(q[1], 1e-9 * R);
  };
  compass_refine<2>(f, arg, best, Vec2(0.05, 0.05 * R),
                    Vec2(1e-8, 1e-8 * R), project);

  return {best, arg[0], arg[1], false};
}

CascadeMin min_cascade_action(const RegimeMGF& m_plus, double rho2) {
  return min_cascade_action_cost(m_plus, std::log(1.0 / rho2));
}

double kkt_residual_interior(const RegimeMGF& m_plus, const Vec2& v) {
  const double scale = std::max(1.0, m_plus.total_rate());
  const LegendreResult lr = legendre(m_plus, v);
  double r = std::abs(m_plus.eval(lr.theta)) / scale;       // stationarity in v1
  r = std::max(r, std::max(0.0, -lr.theta[1]));             // u = theta2 >= 0
  r = std::max(r, std::abs(lr.theta[1] * v[1]) / scale);    // u v2 = 0
  r = std::max(r, std::max(0.0, -v[1]) / scale);            // v2 >= 0
  return r;
}

double kkt_residual_mixture(const RegimeMGF& m_plus, const RegimeMGF& m_minus,
                            double beta, const Vec2& v_plus,
                            const Vec2& v_minus) {
  const double scale = std::max(1.0, m_plus.total_rate());
  if (beta > 1.0 - 1e-9) {
    // Bridge: the interior system at (v1, 0) with M-(theta) <= 0.
    const LegendreResult lp = legendre(m_plus, v_plus);
    double r = std::abs(m_plus.eval(lp.theta)) / scale;
    r = std::max(r, std::abs(v_plus[1]) / scale);
    r = std::max(r, std::max(0.0, m_minus.eval(lp.theta)) / scale);
    return r;
  }
  const LegendreResult lp = legendre(m_plus, v_plus);
  const LegendreResult lm = legendre(m_minus, v_minus);
  double r = (lp.theta - lm.theta).lpNorm<Eigen::Infinity>();
  r = std::max(r, std::abs(beta * m_plus.eval(lp.theta) +
                           (1.0 - beta) * m_minus.eval(lm.theta)) / scale);
  r = std::max(r, std::abs(m_plus.eval(lp.theta)) / scale);   // u1 = 0 branch
  r = std::max(r, std::abs(m_minus.eval(lm.theta)) / scale);
  r = std::max(r, std::abs(beta * v_plus[1] + (1.0 - beta) * v_minus[1]) /
                      std::max(1.0, m_plus.total_rate()));
  return r;
}

double kkt_residual_cascade(const RegimeMGF& m_plus, double y_cost, double h,
                            double v) {
  const double scale = std::max(1.0, m_plus.total_rate());
  const LegendreResult lr = legendre(m_plus, Vec2(v, -v * h));
  const double u = y_cost - lr.theta[1];
  double r = std::abs(m_plus.eval(lr.theta)) / scale;
  r = std::max(r, h > 1e-9 ? std::abs(u) : std::max(0.0, -u));
  r = std::max(r, std::abs(u * h));
  return r;
}

}  // namespace ldnet
