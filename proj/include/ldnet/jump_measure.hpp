#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ldnet {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct JumpAtom {
  int dx;
  int dy;
  double rate;
};

/// Finite set of (dx, dy, rate) atoms driving one regime of a compound
/// Poisson walk. Zero-rate atoms are dropped at construction; duplicate
/// displacements and negative rates are rejected.
class JumpMeasure {
 public:
  JumpMeasure() = default;
  explicit JumpMeasure(std::vector<JumpAtom> atoms);

  const std::vector<JumpAtom>& atoms() const { return atoms_; }
  double total_rate() const { return total_rate_; }
  std::size_t size() const { return atoms_.size(); }

  /// Mean jump rate vector sum(rate * (dx, dy)).
  Vec2 mean_drift() const;

  bool has_positive_dx() const { return span_[0]; }
  bool has_negative_dx() const { return span_[1]; }
  bool has_positive_dy() const { return span_[2]; }
  bool has_negative_dy() const { return span_[3]; }

  /// The measure with x and y jump components exchanged.
  JumpMeasure swapped() const;

 private:
  std::vector<JumpAtom> atoms_;
  double total_rate_ = 0.0;
  bool span_[4] = {false, false, false, false};
};

}  // namespace ldnet
