#pragma once

#include <stdexcept>
#include <string>

namespace ldnet {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParams : Error {
  using Error::Error;
};

/// Traffic equations solve to a nonpositive throughput.
struct DegenerateNetwork : Error {
  using Error::Error;
};

/// An MGF exponent left the representable range; never silently saturated.
struct MgfOverflow : Error {
  using Error::Error;
};

/// Requested point lies outside the span of a level curve.
struct OutOfRange : Error {
  using Error::Error;
};

/// Jump measure lacks atoms on a required half-axis.
struct NonSteep : Error {
  using Error::Error;
};

/// Bracketing search exhausted its range without a sign change.
struct NoSignChange : Error {
  using Error::Error;
};

/// Both quadratic roots qualify as a crossing point.
struct AmbiguousRoot : Error {
  using Error::Error;
};

/// A result contradicts a structural guarantee; indicates a bug or bad input.
struct InternalInconsistency : Error {
  using Error::Error;
};

/// Analysis requested for a network that is not stable.
struct RejectsUnstable : Error {
  using Error::Error;
};

/// Velocity outside the attainable cone of the measure (infinite action).
struct Unattainable : Error {
  using Error::Error;
};

/// Newton iteration failed to reach tolerance.
struct NonConverged : Error {
  using Error::Error;
};

/// A simulation cycle exceeded the configured event cap.
struct CycleCap : Error {
  long events;
  int state_x, state_y;
  long cycles_completed;
  CycleCap(const std::string& msg, long ev, int x, int y, long done)
      : Error(msg), events(ev), state_x(x), state_y(y), cycles_completed(done) {}
};

/// Too few level-reaching excursions for a meaningful estimate.
struct InsufficientHits : Error {
  using Error::Error;
};

}  // namespace ldnet
