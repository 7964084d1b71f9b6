#include "ldnet/jump_measure.hpp"

#include <algorithm>
#include <cmath>

#include "ldnet/errors.hpp"

namespace ldnet {

JumpMeasure::JumpMeasure(std::vector<JumpAtom> atoms) {
  for (const JumpAtom& a : atoms) {
    if (!std::isfinite(a.rate) || a.rate < 0.0)
      throw InvalidParams("jump measure: atom rate must be finite and >= 0");
    if (a.rate == 0.0) continue;
    atoms_.push_back(a);
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    for (std::size_t j = i + 1; j < atoms_.size(); ++j)
      if (atoms_[i].dx == atoms_[j].dx && atoms_[i].dy == atoms_[j].dy)
        throw InvalidParams("jump measure: duplicate displacement atom");
  for (const JumpAtom& a : atoms_) {
    total_rate_ += a.rate;
    if (a.dx > 0) span_[0] = true;
    if (a.dx < 0) span_[1] = true;
    if (a.dy > 0) span_[2] = true;
    if (a.dy < 0) span_[3] = true;
  }
  if (atoms_.empty() || total_rate_ <= 0.0)
    throw InvalidParams("jump measure: total rate must be positive");
}

Vec2 JumpMeasure::mean_drift() const {
  Vec2 d = Vec2::Zero();
  for (const JumpAtom& a : atoms_) d += a.rate * Vec2(a.dx, a.dy);
  return d;
}

JumpMeasure JumpMeasure::swapped() const {
  std::vector<JumpAtom> sw;
  sw.reserve(atoms_.size());
  for (const JumpAtom& a : atoms_) sw.push_back({a.dy, a.dx, a.rate});
  return JumpMeasure(std::move(sw));
}

}  // namespace ldnet
