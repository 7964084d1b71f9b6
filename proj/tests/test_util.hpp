#pragma once

// Shared test helpers: deterministic random instances and small independent
// oracles (fixed-point iteration, finite differences).

#include <cmath>
#include <random>
#include <utility>

#include "ldnet/mgf.hpp"
#include "ldnet/network.hpp"

namespace test_util {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Random valid parameter set; optionally forces mu1_star = mu1 (pure
/// Jackson) and/or rejects until the network is stable.
inline ldnet::NetworkParams random_params(std::mt19937_64& rng,
                                          bool jackson_only,
                                          bool require_stable) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    ldnet::NetworkParams p{};
    p.lambda1_bar = uniform(rng, 0.05, 2.0);
    p.lambda2_bar = uniform(rng, 0.05, 2.0);
    p.mu1 = uniform(rng, 0.2, 4.0);
    p.mu2 = uniform(rng, 0.2, 4.0);
    p.mu1_star = jackson_only ? p.mu1 : p.mu1 + uniform(rng, 0.05, 4.0);
    p.r12 = uniform(rng, 0.0, 0.9);
    p.r21 = uniform(rng, 0.0, 0.9);
    try {
      p.validate();
    } catch (...) {
      continue;
    }
    if (require_stable &&
        ldnet::classify_stability(p).cls != ldnet::Stability::Stable)
      continue;
    return p;
  }
  throw std::runtime_error("random_params: no instance found");
}

/// Traffic equations solved by fixed-point iteration, independently of the
/// closed form.
inline std::pair<double, double> traffic_fixed_point(
    const ldnet::NetworkParams& p) {
  double l1 = p.lambda1_bar, l2 = p.lambda2_bar;
  for (int i = 0; i < 100000; ++i) {
    const double n1 = p.lambda1_bar + l2 * p.r21;
    const double n2 = p.lambda2_bar + l1 * p.r12;
    if (std::abs(n1 - l1) + std::abs(n2 - l2) < 1e-16 * (1.0 + n1 + n2)) {
      l1 = n1;
      l2 = n2;
      break;
    }
    l1 = n1;
    l2 = n2;
  }
  return {l1, l2};
}

inline ldnet::Vec2 fd_gradient(const ldnet::RegimeMGF& m, const ldnet::Vec2& th,
                               double h = 1e-6) {
  ldnet::Vec2 g;
  for (int i = 0; i < 2; ++i) {
    ldnet::Vec2 a = th, b = th;
    a[i] += h;
    b[i] -= h;
    g[i] = (m.eval(a) - m.eval(b)) / (2.0 * h);
  }
  return g;
}

// Nested differencing needs a wider step than the gradient check or the
// rounding error of the inner difference dominates.
inline ldnet::Mat2 fd_hessian(const ldnet::RegimeMGF& m, const ldnet::Vec2& th,
                              double h = 1e-4) {
  ldnet::Mat2 out;
  for (int i = 0; i < 2; ++i) {
    ldnet::Vec2 a = th, b = th;
    a[i] += h;
    b[i] -= h;
    const ldnet::Vec2 ga = fd_gradient(m, a, h), gb = fd_gradient(m, b, h);
    for (int j = 0; j < 2; ++j) out(j, i) = (ga[j] - gb[j]) / (2.0 * h);
  }
  return out;
}

}  // namespace test_util
