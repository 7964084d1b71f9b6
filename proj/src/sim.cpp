#include "ldnet/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <thread>

#include "ldnet/errors.hpp"

namespace ldnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// splitmix64: small, fast, fully deterministic across platforms. Streams
// are derived from (master_seed, stream_index) so the worker count never
// changes the results.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
};

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  Rng h(master ^ 0x6c62272e07bb0142ULL);
  h.state += index * 0x100000001b3ULL;
  h.next_u64();
  return h.next_u64();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LDNET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(std::min(hw, 16u));
}

void run_parallel(int n_units, int threads, const std::function<void(int)>& work) {
  if (threads <= 1 || n_units <= 1) {
    for (int i = 0; i < n_units; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < std::min(threads, n_units); ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_units; i = next.fetch_add(1))
        work(i);
    });
  for (auto& th : pool) th.join();
}

struct LineFit {
  double slope = kNaN;
  double stderr_ = kNaN;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return {};
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return {};
  LineFit f;
  f.slope = sxy / sxx;
  if (n > 2) {
    double ssr = 0;
    const double a = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ys[i] - (a + f.slope * xs[i]);
      ssr += r * r;
    }
    f.stderr_ = std::sqrt(ssr / double(n - 2) / sxx);
  } else {
    f.stderr_ = 0.0;
  }
  return f;
}

}  // namespace

CtmcModel::CtmcModel(JumpMeasure interior, JumpMeasure x_boundary,
                     double unif_rate, double rho2)
    : interior_(std::move(interior)),
      x_boundary_(std::move(x_boundary)),
      unif_rate_(unif_rate),
      rho2_(rho2) {
  for (int on_axis = 0; on_axis < 2; ++on_axis) {
    const JumpMeasure& m = on_axis ? x_boundary_ : interior_;
    for (int at_wall = 0; at_wall < 2; ++at_wall) {
      Table& t = tables_[on_axis][at_wall];
      double cum = 0.0;
      for (const JumpAtom& a : m.atoms()) {
        if (at_wall && a.dx < 0) continue;
        if (on_axis && a.dy < 0) continue;  // boundary measures never have these
        t.dx[t.n] = static_cast<signed char>(a.dx);
        t.dy[t.n] = static_cast<signed char>(a.dy);
        cum += a.rate / unif_rate_;
        t.cum[t.n] = cum;
        ++t.n;
      }
      if (cum > 1.0 + 1e-12)
        throw InternalInconsistency("ctmc model: rates exceed the uniformization bound");
    }
  }
}

CtmcModel CtmcModel::jackson(const NetworkParams& p) {
  p.validate();
  const TrafficSolution t = solve_traffic(p);
  const double unif = p.lambda1_bar + p.lambda2_bar + p.mu1_star + p.mu2;
  return CtmcModel(interior_jumps(p), boundary_jumps(p), unif, t.rho2);
}

CtmcModel CtmcModel::fork(const ForkParams& p) {
  p.validate();
  auto [interior, boundary] = fork_jumps(p);
  const double unif = p.nu + p.lambda + p.eta + p.alpha + p.beta_rate;
  return CtmcModel(std::move(interior), std::move(boundary), unif,
                   (p.eta + p.nu) / p.beta_rate);
}

std::vector<std::pair<SimState, double>> CtmcModel::transitions(SimState s) const {
  const JumpMeasure& m = s.y == 0 ? x_boundary_ : interior_;
  std::vector<std::pair<SimState, double>> out;
  for (const JumpAtom& a : m.atoms()) {
    const SimState next{s.x + a.dx, s.y + a.dy};
    if (next.x < 0 || next.y < 0) continue;
    out.emplace_back(next, a.rate);
  }
  return out;
}

std::vector<std::pair<SimState, double>> step_generator(const CtmcModel& m,
                                                        SimState s) {
  return m.transitions(s);
}

void SimConfig::validate() const {
  if (n_cycles < 1) throw InvalidParams("sim config: n_cycles must be >= 1");
  if (max_events < 1) throw InvalidParams("sim config: max_events must be >= 1");
  int prev = 0;
  for (int l : levels) {
    if (l <= prev)
      throw InvalidParams("sim config: levels must be strictly increasing positive");
    prev = l;
  }
  if (splitting_effort < 0 || level_spacing < 1 || splitting_replicates < 1 ||
      blocks < 1 || tail_ymax < 1)
    throw InvalidParams("sim config: nonsensical sampling parameters");
}

namespace {

inline SimState sample_step(const CtmcModel& model, SimState s, Rng& rng) {
  const CtmcModel::Table& t = model.table(s.y == 0, s.x == 0);
  const double u = rng.next_double();
  for (int i = 0; i < t.n; ++i)
    if (u < t.cum[i]) return {s.x + t.dx[i], s.y + t.dy[i]};
  return s;  // self-loop
}

// What one trajectory piece should record.
struct Trackers {
  bool tail = false;
  bool drift = false;
  const std::vector<int>* levels = nullptr;  // first-hit snapshots
};

struct CycleResult {
  long steps = 0;
  int max_x = 0;
  bool capped = false;
  SimState final_state;
  // parallel to Trackers::levels
  std::vector<double> hit_fraction;  // y0/total at first hit; NaN if unreached
  double drift_sum = 0.0;
  long drift_n = 0;
};

// One full regeneration cycle from the origin: dwell, excursion, return.
// Boundary time is measured from the first exit, so the origin dwell never
// enters the occupancy fractions but does enter the tail table.
CycleResult run_cycle(const CtmcModel& model, Rng& rng, long max_events,
                      const Trackers& tr, std::vector<double>* tail_time,
                      int tail_ymax, long* total_steps) {
  CycleResult res;
  if (tr.levels) res.hit_fraction.assign(tr.levels->size(), kNaN);

  SimState s{0, 0};
  long steps = 0;
  // dwell at the origin until the first real move
  while (true) {
    if (tr.tail) (*tail_time)[0] += 1.0;
    ++steps;
    const SimState next = sample_step(model, s, rng);
    if (steps >= max_events) {
      res.capped = true;
      res.steps = steps;
      res.final_state = s;
      if (total_steps) *total_steps += steps;
      return res;
    }
    if (!(next == s)) {
      s = next;
      break;
    }
  }

  long exc_steps = 0, y0_steps = 0;
  std::size_t next_level = 0;
  int last_busy_x = -1;
  while (!(s.x == 0 && s.y == 0)) {
    if (tr.levels && next_level < tr.levels->size() &&
        s.x == (*tr.levels)[next_level]) {
      res.hit_fraction[next_level] =
          exc_steps > 0 ? double(y0_steps) / double(exc_steps) : 0.0;
      ++next_level;
    }
    res.max_x = std::max(res.max_x, s.x);
    if (tr.tail && s.x == 0) (*tail_time)[std::min(s.y, tail_ymax)] += 1.0;
    if (s.y == 0) ++y0_steps;
    ++exc_steps;
    ++steps;
    if (steps >= max_events) {
      res.capped = true;
      break;
    }
    const SimState next = sample_step(model, s, rng);
    if (tr.drift && s.y == 0 && next.y == 1) {
      if (last_busy_x >= 0) {
        res.drift_sum += s.x - last_busy_x;
        ++res.drift_n;
      }
      last_busy_x = s.x;
    }
    s = next;
  }
  res.steps = steps;
  res.final_state = s;
  if (total_steps) *total_steps += steps;
  return res;
}

struct BlockAcc {
  long cycles = 0;
  std::vector<long> hits;
  std::vector<double> bf_sum, bf_sumsq;
  double drift_sum = 0.0;
  long drift_n = 0;
  long total_steps = 0;
  std::vector<double> tail_time;
  bool capped = false;
  CycleCap cap_error{"", 0, 0, 0, 0};
};

BlockAcc run_plain_block(const CtmcModel& model, const SimConfig& cfg,
                         long n_cycles, std::uint64_t seed, bool want_tail,
                         bool want_drift) {
  BlockAcc acc;
  acc.hits.assign(cfg.levels.size(), 0);
  acc.bf_sum.assign(cfg.levels.size(), 0.0);
  acc.bf_sumsq.assign(cfg.levels.size(), 0.0);
  acc.tail_time.assign(cfg.tail_ymax + 1, 0.0);

  Rng rng(seed);
  Trackers tr;
  tr.tail = want_tail;
  tr.drift = want_drift;
  tr.levels = &cfg.levels;

  for (long c = 0; c < n_cycles; ++c) {
    const CycleResult r = run_cycle(model, rng, cfg.max_events, tr,
                                    &acc.tail_time, cfg.tail_ymax,
                                    &acc.total_steps);
    if (r.capped) {
      acc.capped = true;
      acc.cap_error = CycleCap("simulation cycle exceeded max_events", r.steps,
                               r.final_state.x, r.final_state.y, acc.cycles);
      return acc;
    }
    ++acc.cycles;
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
      if (!std::isnan(r.hit_fraction[i])) {
        ++acc.hits[i];
        acc.bf_sum[i] += r.hit_fraction[i];
        acc.bf_sumsq[i] += r.hit_fraction[i] * r.hit_fraction[i];
      }
    }
    acc.drift_sum += r.drift_sum;
    acc.drift_n += r.drift_n;
  }
  return acc;
}

// population of per-level stats from merged plain blocks
std::vector<LevelStat> plain_level_stats(const SimConfig& cfg,
                                         const std::vector<BlockAcc>& blocks,
                                         long cycles) {
  std::vector<LevelStat> out(cfg.levels.size());
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    long hits = 0;
    double bf_sum = 0, bf_sumsq = 0;
    for (const BlockAcc& b : blocks) {
      hits += b.hits[i];
      bf_sum += b.bf_sum[i];
      bf_sumsq += b.bf_sumsq[i];
    }
    LevelStat& ls = out[i];
    ls.level = cfg.levels[i];
    ls.hits = hits;
    const double p = double(hits) / double(cycles);
    ls.p = p;
    ls.ci = 1.96 * std::sqrt(std::max(p * (1.0 - p), 0.0) / double(cycles));
    if (hits > 0) {
      ls.boundary_fraction = bf_sum / double(hits);
      if (hits > 1) {
        const double var =
            std::max(bf_sumsq - bf_sum * bf_sum / double(hits), 0.0) /
            double(hits - 1);
        ls.bf_ci = 1.96 * std::sqrt(var / double(hits));
      }
    } else {
      ls.boundary_fraction = kNaN;
      ls.bf_ci = kNaN;
    }
  }
  return out;
}

void fit_slope(const SimConfig& cfg, SimEstimate& est) {
  std::vector<double> xs, ys;
  for (const LevelStat& ls : est.levels)
    if (ls.level >= cfg.slope_min_level && ls.p > 0.0) {
      xs.push_back(ls.level);
      ys.push_back(-std::log(ls.p));
    }
  const LineFit f = fit_line(xs, ys);
  est.slope = f.slope;
  est.slope_stderr = f.stderr_;
}

// ---- fixed-effort splitting ----

struct Entry {
  SimState s;
  long y0_steps = 0;
  long steps = 0;
};

enum class SegmentEnd { Died, Hit, Capped };

SegmentEnd run_segment(const CtmcModel& model, Rng& rng, long max_events,
                       int threshold, Entry& e, bool from_origin,
                       double* drift_sum, long* drift_n, long* seg_steps) {
  SimState s = e.s;
  long steps = 0;
  if (from_origin) {
    while (true) {
      ++steps;
      if (steps >= max_events) {
        e.s = s;
        *seg_steps += steps;
        return SegmentEnd::Capped;
      }
      const SimState next = sample_step(model, s, rng);
      if (!(next == s)) {
        s = next;
        break;
      }
    }
  }
  int last_busy_x = -1;
  while (true) {
    if (s.x == 0 && s.y == 0) {
      e.s = s;
      *seg_steps += steps;
      return SegmentEnd::Died;
    }
    if (s.x == threshold) {
      e.s = s;
      *seg_steps += steps;
      return SegmentEnd::Hit;
    }
    if (s.y == 0) ++e.y0_steps;
    ++e.steps;
    ++steps;
    if (steps >= max_events) {
      e.s = s;
      *seg_steps += steps;
      return SegmentEnd::Capped;
    }
    const SimState next = sample_step(model, s, rng);
    if (drift_sum && s.y == 0 && next.y == 1) {
      if (last_busy_x >= 0) {
        *drift_sum += s.x - last_busy_x;
        ++(*drift_n);
      }
      last_busy_x = s.x;
    }
    s = next;
  }
}

struct SplitReplicate {
  std::vector<double> p;        // per threshold
  std::vector<double> bf;      // per threshold, NaN when no hits
  std::vector<long> hits;
  double drift_sum = 0.0;
  long drift_n = 0;
  long segments = 0;
  long root_cycles = 0;
  bool capped = false;
  CycleCap cap_error{"", 0, 0, 0, 0};
};

SplitReplicate run_split_replicate(const CtmcModel& model, const SimConfig& cfg,
                                   const std::vector<int>& thresholds,
                                   std::uint64_t seed) {
  SplitReplicate rep;
  const std::size_t m = thresholds.size();
  rep.p.assign(m, 0.0);
  rep.bf.assign(m, kNaN);
  rep.hits.assign(m, 0);

  Rng rng(seed);
  const int effort = cfg.splitting_effort;
  std::vector<Entry> pool;
  double running_p = 1.0;

  for (std::size_t stage = 0; stage < m; ++stage) {
    const int target = thresholds[stage];
    std::vector<Entry> next_pool;
    long hits = 0;
    long seg_steps = 0;
    for (int eidx = 0; eidx < effort; ++eidx) {
      Entry e;
      bool from_origin = stage == 0;
      if (!from_origin) {
        const std::size_t pick =
            std::min<std::size_t>(std::size_t(rng.next_double() * pool.size()),
                                  pool.size() - 1);
        e = pool[pick];
      }
      const SegmentEnd end = run_segment(
          model, rng, cfg.max_events, target, e, from_origin,
          stage == 0 ? &rep.drift_sum : nullptr,
          stage == 0 ? &rep.drift_n : nullptr, &seg_steps);
      ++rep.segments;
      if (stage == 0) ++rep.root_cycles;
      if (end == SegmentEnd::Capped) {
        rep.capped = true;
        rep.cap_error = CycleCap("splitting segment exceeded max_events",
                                 cfg.max_events, e.s.x, e.s.y, rep.root_cycles);
        return rep;
      }
      if (end == SegmentEnd::Hit) {
        ++hits;
        next_pool.push_back(e);
      }
    }
    running_p *= double(hits) / double(effort);
    rep.p[stage] = running_p;
    rep.hits[stage] = hits;
    if (hits > 0) {
      double s = 0.0;
      for (const Entry& e : next_pool)
        s += e.steps > 0 ? double(e.y0_steps) / double(e.steps) : 0.0;
      rep.bf[stage] = s / double(hits);
    }
    if (hits == 0) break;  // downstream probabilities stay zero
    pool = std::move(next_pool);
  }
  return rep;
}

SimEstimate estimate_with_splitting(const CtmcModel& model,
                                    const SimConfig& cfg) {
  std::set<int> tset;
  const int lmax = cfg.levels.back();
  for (int t = cfg.level_spacing; t <= lmax; t += cfg.level_spacing)
    tset.insert(t);
  for (int l : cfg.levels) tset.insert(l);
  const std::vector<int> thresholds(tset.begin(), tset.end());

  const int R = cfg.splitting_replicates;
  std::vector<SplitReplicate> reps(R);
  run_parallel(R, resolve_threads(cfg.threads), [&](int r) {
    // replicate streams live far from the plain-mode block streams
    const std::uint64_t stream = (1ULL << 32) + std::uint64_t(r);
    reps[r] = run_split_replicate(model, cfg, thresholds,
                                  stream_seed(cfg.master_seed, stream));
  });
  for (const SplitReplicate& r : reps)
    if (r.capped) throw r.cap_error;

  SimEstimate est;
  est.splitting = true;
  est.master_seed = cfg.master_seed;
  for (const SplitReplicate& r : reps) {
    est.cycle_equivalents += double(r.segments);
    est.cycles += r.root_cycles;
  }

  est.levels.resize(cfg.levels.size());
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    const auto it =
        std::find(thresholds.begin(), thresholds.end(), cfg.levels[i]);
    const std::size_t ti = std::size_t(it - thresholds.begin());
    LevelStat& ls = est.levels[i];
    ls.level = cfg.levels[i];

    double sp = 0, spp = 0;
    double sbf = 0, sbf2 = 0;
    int nbf = 0;
    for (const SplitReplicate& r : reps) {
      sp += r.p[ti];
      spp += r.p[ti] * r.p[ti];
      ls.hits += r.hits[ti];
      if (!std::isnan(r.bf[ti])) {
        sbf += r.bf[ti];
        sbf2 += r.bf[ti] * r.bf[ti];
        ++nbf;
      }
    }
    ls.p = sp / R;
    const double pvar = std::max(spp - sp * sp / R, 0.0) / double(R - 1);
    ls.ci = 1.96 * std::sqrt(pvar / R);
    if (nbf > 0) {
      ls.boundary_fraction = sbf / nbf;
      const double bvar =
          nbf > 1 ? std::max(sbf2 - sbf * sbf / nbf, 0.0) / double(nbf - 1)
                  : 0.0;
      ls.bf_ci = 1.96 * std::sqrt(bvar / std::max(nbf, 1));
    } else {
      ls.boundary_fraction = kNaN;
      ls.bf_ci = kNaN;
    }
  }

  double drift_sum = 0;
  long drift_n = 0;
  for (const SplitReplicate& r : reps) {
    drift_sum += r.drift_sum;
    drift_n += r.drift_n;
  }
  est.drift_per_busy_cycle = drift_n > 0 ? drift_sum / drift_n : kNaN;
  fit_slope(cfg, est);
  return est;
}

std::vector<BlockAcc> run_plain(const CtmcModel& model, const SimConfig& cfg,
                                bool want_tail, bool want_drift) {
  const int B = int(std::min<long>(cfg.blocks, cfg.n_cycles));
  std::vector<BlockAcc> blocks(B);
  run_parallel(B, resolve_threads(cfg.threads), [&](int b) {
    const long n0 = cfg.n_cycles / B + (long(b) < cfg.n_cycles % B ? 1 : 0);
    blocks[b] = run_plain_block(model, cfg, n0,
                                stream_seed(cfg.master_seed, b), want_tail,
                                want_drift);
  });
  for (const BlockAcc& b : blocks)
    if (b.capped) throw b.cap_error;
  return blocks;
}

}  // namespace

SimEstimate estimate_overflow(const CtmcModel& model, const SimConfig& config) {
  config.validate();
  if (config.levels.empty()) {
    SimEstimate est;
    est.master_seed = config.master_seed;
    est.slope = kNaN;
    est.slope_stderr = kNaN;
    est.drift_per_busy_cycle = kNaN;
    return est;
  }
  if (config.splitting_effort > 0) return estimate_with_splitting(model, config);

  const auto blocks = run_plain(model, config, false, true);
  SimEstimate est;
  est.master_seed = config.master_seed;
  long drift_n = 0;
  double drift_sum = 0;
  for (const BlockAcc& b : blocks) {
    est.cycles += b.cycles;
    est.cycle_equivalents += double(b.cycles);
    drift_sum += b.drift_sum;
    drift_n += b.drift_n;
  }
  est.drift_per_busy_cycle = drift_n > 0 ? drift_sum / drift_n : kNaN;
  est.levels = plain_level_stats(config, blocks, est.cycles);
  fit_slope(config, est);
  return est;
}

std::vector<LevelStat> boundary_occupancy(const CtmcModel& model,
                                          const SimConfig& config) {
  const SimEstimate est = estimate_overflow(model, config);
  for (const LevelStat& ls : est.levels)
    if (ls.hits < 30)
      throw InsufficientHits("boundary occupancy: fewer than 30 excursions reached level " +
                             std::to_string(ls.level));
  return est.levels;
}

TailEstimate stationary_tail(const CtmcModel& model, const SimConfig& config) {
  config.validate();
  SimConfig cfg = config;
  cfg.splitting_effort = 0;
  const auto blocks = run_plain(model, cfg, true, false);

  const int ymax = cfg.tail_ymax;
  TailEstimate est;
  est.tail.assign(ymax + 1, 0.0);
  est.tail_ci.assign(ymax + 1, 0.0);

  // per-block tails for batch-mean confidence intervals
  std::vector<std::vector<double>> block_tails;
  double total_steps = 0;
  for (const BlockAcc& b : blocks) {
    est.cycles += b.cycles;
    total_steps += double(b.total_steps);
    std::vector<double> bt(ymax + 1, 0.0);
    double cum = 0.0;
    for (int y = ymax; y >= 0; --y) {
      cum += b.tail_time[y];
      bt[y] = b.total_steps > 0 ? cum / double(b.total_steps) : 0.0;
    }
    block_tails.push_back(std::move(bt));
  }
  std::vector<double> cum_time(ymax + 1, 0.0);
  {
    std::vector<double> merged(ymax + 1, 0.0);
    for (const BlockAcc& b : blocks)
      for (int y = 0; y <= ymax; ++y) merged[y] += b.tail_time[y];
    double cum = 0.0;
    for (int y = ymax; y >= 0; --y) {
      cum += merged[y];
      cum_time[y] = cum;
    }
  }
  const std::size_t nb = block_tails.size();
  for (int y = 0; y <= ymax; ++y) {
    est.tail[y] = cum_time[y] / total_steps;
    if (nb > 1) {
      double s = 0, s2 = 0;
      for (const auto& bt : block_tails) {
        s += bt[y];
        s2 += bt[y] * bt[y];
      }
      const double var = std::max(s2 - s * s / double(nb), 0.0) / double(nb - 1);
      est.tail_ci[y] = 1.96 * std::sqrt(var / double(nb));
    }
  }
  est.p_x0 = est.tail[0];

  std::vector<double> xs, ys;
  for (int y = 1; y <= ymax; ++y)
    if (est.tail[y] > 0.0) {
      xs.push_back(y);
      ys.push_back(std::log(est.tail[y]));
    }
  est.slope = fit_line(xs, ys).slope;

  est.c = 0.0;
  const double rho2 = model.rho2();
  for (int y = 0; y <= ymax; ++y)
    if (est.tail[y] > 0.0)
      est.c = std::max(est.c, est.tail[y] / std::pow(rho2, y));
  return est;
}

}  // namespace ldnet
