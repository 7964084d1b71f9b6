#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ldnet/fork.hpp"
#include "ldnet/network.hpp"

namespace ldnet {

struct SimState {
  int x = 0;
  int y = 0;
  bool operator==(const SimState&) const = default;
};

/// Quadrant CTMC with one jump law off the x-axis and another on it,
/// simulated by uniformization at a constant total rate with self-loops.
/// Transitions that would exit the quadrant are suppressed.
class CtmcModel {
 public:
  static CtmcModel jackson(const NetworkParams& p);
  static CtmcModel fork(const ForkParams& p);

  /// Enabled transitions with their rates at `s`.
  std::vector<std::pair<SimState, double>> transitions(SimState s) const;

  double uniformization_rate() const { return unif_rate_; }
  double rho2() const { return rho2_; }

  // Cumulative jump-probability tables for the four suppression cases,
  // indexed [y_on_boundary][x_at_wall]. Hot-loop internals, exposed for the
  // engine.
  struct Table {
    int n = 0;
    signed char dx[8];
    signed char dy[8];
    double cum[8];
  };
  const Table& table(bool on_x_axis, bool at_y_wall) const {
    return tables_[on_x_axis ? 1 : 0][at_y_wall ? 1 : 0];
  }

 private:
  CtmcModel(JumpMeasure interior, JumpMeasure x_boundary, double unif_rate,
            double rho2);

  JumpMeasure interior_, x_boundary_;
  double unif_rate_;
  double rho2_;
  Table tables_[2][2];
};

/// Spec-named wrapper over CtmcModel::transitions.
std::vector<std::pair<SimState, double>> step_generator(const CtmcModel& m,
                                                        SimState s);

struct SimConfig {
  std::uint64_t master_seed = 1;
  std::vector<int> levels;          ///< strictly increasing positive levels
  long n_cycles = 100000;           ///< regeneration cycles (splitting off)
  int splitting_effort = 0;         ///< 0 = off, else fixed effort per stage
  int splitting_replicates = 32;    ///< independent splitting runs (CI batches)
  int level_spacing = 2;            ///< splitting threshold spacing
  long max_events = 10000000;       ///< per-cycle event cap
  int slope_min_level = 8;          ///< levels below are excluded from the fit
  int tail_ymax = 30;
  int blocks = 64;                  ///< plain-mode replication blocks
  int threads = 0;                  ///< 0 = LDNET_THREADS env or hardware

  void validate() const;
};

struct LevelStat {
  int level = 0;
  double p = 0.0;
  double ci = 0.0;
  double boundary_fraction = 0.0;
  double bf_ci = 0.0;
  long hits = 0;
};

struct SimEstimate {
  std::vector<LevelStat> levels;
  double slope = 0.0;          ///< fitted decay of -log p(l) per level
  double slope_stderr = 0.0;
  double drift_per_busy_cycle = 0.0;
  long cycles = 0;             ///< completed regeneration cycles
  double cycle_equivalents = 0.0;
  bool splitting = false;
  std::uint64_t master_seed = 0;
};

struct TailEstimate {
  std::vector<double> tail;     ///< sum_{j >= y} pi(0, j), y = 0..ymax
  std::vector<double> tail_ci;
  double slope = 0.0;           ///< fitted log-linear decay over y
  double c = 0.0;               ///< smallest c with tail(y) <= c rho2^y
  double p_x0 = 0.0;            ///< == tail[0]
  long cycles = 0;
};

/// Overflow probabilities per level from regenerative cycles, with the
/// fitted decay slope, boundary occupancy per level and the saturated-drift
/// diagnostic. Splitting (fixed effort per level threshold) activates when
/// config.splitting_effort > 0. Throws CycleCap when a cycle exceeds
/// max_events.
SimEstimate estimate_overflow(const CtmcModel& model, const SimConfig& config);

/// Per-level boundary occupancy only. Throws InsufficientHits when a level
/// has fewer than 30 reaching excursions.
std::vector<LevelStat> boundary_occupancy(const CtmcModel& model,
                                          const SimConfig& config);

/// Long-run column mass sum_{j >= y} pi(0, j) with a log-linear fit and the
/// smallest constant bounding it by rho2^y.
TailEstimate stationary_tail(const CtmcModel& model, const SimConfig& config);

}  // namespace ldnet
