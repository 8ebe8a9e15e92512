#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fep/error.hpp"
#include "fep/lattice.hpp"
#include "fep/mapping.hpp"
#include "fep/rates.hpp"
#include "fep/rng.hpp"

namespace fep {

// ---------------------------------------------------------------------------
// Jump rules on a padded occupation buffer.
//
// The buffer holds sites 0..size: FEP pads with the walls eta_0 = eta_N = 1,
// SEP pads with zeros that no rule ever reads.

/// Facilitated exclusion: a particle jumps right across (x, x+1) iff x-1 is
/// occupied, left across (x, x+1) iff x+2 is occupied. Bonds x = 1..N-2.
struct FepRules {
  using State = Configuration;

  static std::size_t bonds(std::size_t size) { return size >= 3 ? size - 2 : 0; }

  static void pad(const State& s, std::vector<std::uint8_t>& occ) {
    occ.assign(s.size() + 1, 1);
    for (std::size_t x = 1; x < s.size(); ++x) occ[x] = s[x];
  }

  static bool right(const std::uint8_t* occ, std::size_t x) { return occ[x - 1] & occ[x] & (occ[x + 1] ^ 1); }
  static bool left(const std::uint8_t* occ, std::size_t x) { return (occ[x] ^ 1) & occ[x + 1] & occ[x + 2]; }

  // Rules read sites x-1..x+2, so a swap at x touches bonds x-2..x+2.
  static constexpr std::size_t kReach = 2;
};

/// Simple exclusion: right across (y, y+1) iff xi_y = 1, xi_{y+1} = 0; left
/// the other way. Bonds y = 1..M-2.
struct SepRules {
  using State = SepConfiguration;

  static std::size_t bonds(std::size_t size) { return size >= 3 ? size - 2 : 0; }

  static void pad(const State& s, std::vector<std::uint8_t>& occ) {
    occ.assign(s.size() + 1, 0);
    for (std::size_t y = 1; y < s.size(); ++y) occ[y] = s[y];
  }

  static bool right(const std::uint8_t* occ, std::size_t y) { return occ[y] & (occ[y + 1] ^ 1); }
  static bool left(const std::uint8_t* occ, std::size_t y) { return (occ[y] ^ 1) & occ[y + 1]; }

  static constexpr std::size_t kReach = 1;
};

/// Per-bond jump rates of the current state, with incremental local updates.
///
/// A right jump across bond x has rate (sigma + p N^{-kappa}) Theta_N when its
/// constraint holds and 0 otherwise; a left jump has rate sigma Theta_N.
/// For SEP the N in the prefactor is the originating FEP's N (Params::N).
template <class Rules, class Selector>
class BondRates {
 public:
  using State = typename Rules::State;

  BondRates(const State& s, const Params& params) : size_(s.size()), params_(params) {
    Rules::pad(s, occ_);
    selector_.reset(Rules::bonds(size_), params.right_rate(), params.left_rate());
    for (std::size_t b = 1; b <= Rules::bonds(size_); ++b) refresh(b);
  }

  double total() const { return selector_.total(); }
  std::size_t enabled_count() const { return selector_.enabled_count(); }
  std::size_t size() const { return size_; }
  const Params& params() const { return params_; }

  double rate(std::size_t bond, Direction dir) const {
    if (bond < 1 || bond > Rules::bonds(size_)) return 0.0;
    if (!selector_.enabled(bond - 1, dir)) return 0.0;
    return dir == Direction::right ? params_.right_rate() : params_.left_rate();
  }

  /// Enabled move for u uniform in [0, total()).
  Move select(double u) const {
    Move m = selector_.select(u);
    ++m.bond;
    return m;
  }

  void apply(const Move& m) {
    std::swap(occ_[m.bond], occ_[m.bond + 1]);
    const std::size_t lo = m.bond > Rules::kReach ? m.bond - Rules::kReach : 1;
    const std::size_t hi = std::min(m.bond + Rules::kReach, Rules::bonds(size_));
    for (std::size_t b = lo; b <= hi; ++b) refresh(b);
  }

  State state() const {
    return State(size_, std::span<const std::uint8_t>(occ_).subspan(1, size_ - 1));
  }

  std::span<const std::uint8_t> occupations() const { return std::span<const std::uint8_t>(occ_).subspan(1, size_ - 1); }

 private:
  void refresh(std::size_t b) {
    selector_.set(b - 1, Direction::right, Rules::right(occ_.data(), b));
    selector_.set(b - 1, Direction::left, Rules::left(occ_.data(), b));
  }

  std::size_t size_;
  Params params_;
  std::vector<std::uint8_t> occ_;
  Selector selector_;
};

/// Rate table of the FEP generator on a single configuration.
using RateTable = BondRates<FepRules, FenwickRates>;
using SepRateTable = BondRates<SepRules, FenwickRates>;

struct Step {
  Configuration next;
  double elapsed = 0.0;
  Move move;
};

/// One exponential-clock transition of the FEP. Returns nullopt when the state
/// is absorbing (total rate zero). `rates` must describe `state` and is
/// updated in place to describe the returned configuration.
inline std::optional<Step> fep_step(const Configuration& state, RateTable& rates, RandomStream& rng) {
  if (!is_ergodic(state)) throw DomainError("fep_step requires an ergodic configuration");
  if (rates.state() != state) throw InconsistentShape("rate table does not describe the given configuration");
  const double total = rates.total();
  if (total <= 0.0) return std::nullopt;
  const double elapsed = rng.exponential(total);
  const Move m = rates.select(rng.uniform() * total);
  rates.apply(m);
  return Step{rates.state(), elapsed, m};
}

// ---------------------------------------------------------------------------
// Trajectories

struct Event {
  double time = 0.0;
  Move move;
};

template <class State>
struct Trajectory {
  State initial;
  std::vector<double> times;    ///< requested snapshot times
  std::vector<State> snapshots; ///< state at each requested time
  State final_state;            ///< state at t_end
  double t_end = 0.0;
  std::vector<Event> events;    ///< only when requested
  std::uint64_t event_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool absorbed = false;        ///< total rate hit zero before t_end
};

struct SimulationOptions {
  double t_end = 0.0;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  bool record_events = false;
};

/// Exact continuous-time (Gillespie) simulation in macroscopic time: clocks
/// already run at rates multiplied by Theta_N.
template <class Rules, class Selector>
Trajectory<typename Rules::State> simulate_exact(const typename Rules::State& initial, const Params& params,
                                                 const SimulationOptions& opt) {
  using State = typename Rules::State;
  if (!(opt.t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
  if (!std::is_sorted(opt.snapshot_times.begin(), opt.snapshot_times.end()))
    throw DomainError("snapshot times must be sorted");
  for (double t : opt.snapshot_times)
    if (t < 0.0 || t > opt.t_end) throw DomainError("snapshot times must lie in [0, t_end]");

  Trajectory<State> traj;
  traj.initial = initial;
  traj.times = opt.snapshot_times;
  traj.t_end = opt.t_end;
  traj.seed = opt.seed;
  traj.stream = opt.stream;
  traj.snapshots.reserve(opt.snapshot_times.size());

  BondRates<Rules, Selector> rates(initial, params);
  RandomStream rng(opt.seed, opt.stream);
  double t = 0.0;
  std::size_t next = 0;
  const std::size_t n_snap = opt.snapshot_times.size();

  for (;;) {
    const double total = rates.total();
    if (total <= 0.0) {
      traj.absorbed = true;
      break;
    }
    const double t_next = t + rng.exponential(total);
    while (next < n_snap && opt.snapshot_times[next] < t_next) {
      traj.snapshots.push_back(rates.state());
      ++next;
    }
    if (t_next > opt.t_end) break;
    t = t_next;
    const Move m = rates.select(rng.uniform() * total);
    rates.apply(m);
    ++traj.event_count;
    if (opt.record_events) traj.events.push_back({t, m});
  }
  while (traj.snapshots.size() < n_snap) traj.snapshots.push_back(rates.state());
  traj.final_state = rates.state();
  return traj;
}

/// FEP trajectory; the initial configuration must be ergodic.
template <class Selector = ClassRates>
Trajectory<Configuration> fep_simulate(const Configuration& initial, const Params& params,
                                       const SimulationOptions& opt) {
  if (!is_ergodic(initial)) throw DomainError("FEP simulation requires an ergodic initial configuration");
  if (initial.size() != params.N)
    throw InconsistentShape("configuration scale " + std::to_string(initial.size()) + " differs from params.N=" +
                            std::to_string(params.N));
  return simulate_exact<FepRules, Selector>(initial, params, opt);
}

/// SEP trajectory on the initial state's own lattice, accelerated by the
/// Theta_N carried by `params` (N is the originating FEP's scale).
template <class Selector = ClassRates>
Trajectory<SepConfiguration> sep_simulate(const SepConfiguration& initial, const Params& params,
                                          const SimulationOptions& opt) {
  return simulate_exact<SepRules, Selector>(initial, params, opt);
}

// ---------------------------------------------------------------------------
// Direct transition enumeration (independent of BondRates)

struct Transition {
  Move move;
  double rate = 0.0;
};

inline std::vector<Transition> fep_transitions(const Configuration& eta, const Params& params) {
  std::vector<Transition> out;
  const std::size_t N = eta.size();
  for (std::size_t x = 1; x + 2 <= N; ++x) {
    const bool a = occupied_or_wall(eta, x - 1), b = eta[x], c = eta[x + 1], d = occupied_or_wall(eta, x + 2);
    if (a && b && !c) out.push_back({{x, Direction::right}, params.right_rate()});
    if (!b && c && d) out.push_back({{x, Direction::left}, params.left_rate()});
  }
  return out;
}

inline std::vector<Transition> sep_transitions(const SepConfiguration& xi, const Params& params) {
  std::vector<Transition> out;
  for (std::size_t y = 1; y + 2 <= xi.size(); ++y) {
    if (xi[y] && !xi[y + 1]) out.push_back({{y, Direction::right}, params.right_rate()});
    if (!xi[y] && xi[y + 1]) out.push_back({{y, Direction::left}, params.left_rate()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact generators and uniformization

enum class Side { fep, sep };

inline constexpr std::size_t kStateSpaceCap = 100000;

/// Sparse generator matrix over an enumerated state space; rows sum to zero.
struct Generator {
  std::vector<std::string> states;
  std::vector<std::size_t> row_start;  ///< CSR over off-diagonal entries
  std::vector<std::size_t> column;
  std::vector<double> rate;
  std::vector<double> exit_rate;       ///< minus the diagonal

  std::size_t size() const { return states.size(); }

  double entry(std::size_t i, std::size_t j) const {
    if (i == j) return -exit_rate[i];
    double s = 0.0;
    for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e)
      if (column[e] == j) s += rate[e];
    return s;
  }

  std::size_t index_of(const std::string& s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s, [](const std::string& a, const std::string& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    if (it == states.end() || *it != s) throw IndexError("state " + s + " not in the state space");
    return static_cast<std::size_t>(it - states.begin());
  }
};

/// Admissible particle numbers k of E_N: floor((N-1)/2) <= k <= N-1.
inline std::vector<std::size_t> admissible_particle_numbers(std::size_t N) {
  std::vector<std::size_t> ks;
  for (std::size_t k = (N - 1) / 2; k + 1 <= N; ++k) ks.push_back(k);
  return ks;
}

/// All SEP configurations on Lambda_M with `ell` particles, lexicographic.
inline std::vector<SepConfiguration> enumerate_sep(std::size_t M, std::size_t ell) {
  const std::size_t n = M - 1;
  std::vector<SepConfiguration> out;
  if (ell > n) return out;
  std::vector<std::uint8_t> buf(n);
  auto rec = [&](auto&& self, std::size_t i, std::size_t ones) -> void {
    if (ones > ell || ones + (n - i) < ell) return;
    if (i == n) {
      out.emplace_back(M, buf);
      return;
    }
    buf[i] = 0;
    self(self, i + 1, ones);
    buf[i] = 1;
    self(self, i + 1, ones + 1);
  };
  rec(rec, 0, 0);
  return out;
}

namespace detail {

template <class State, class Transitions>
Generator build_generator(const std::vector<State>& states, Transitions&& transitions) {
  if (states.size() > kStateSpaceCap)
    throw StateSpaceTooLarge("state space of " + std::to_string(states.size()) + " exceeds the cap of " +
                             std::to_string(kStateSpaceCap));
  Generator g;
  // Order by (length, text) so SEP blocks of different M stay contiguous.
  std::vector<std::size_t> order(states.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> text(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) text[i] = states[i].str();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return text[a].size() != text[b].size() ? text[a].size() < text[b].size() : text[a] < text[b];
  });
  g.states.reserve(states.size());
  for (std::size_t i : order) g.states.push_back(text[i]);
  g.row_start.push_back(0);
  for (std::size_t i : order) {
    double exit = 0.0;
    for (const auto& tr : transitions(states[i])) {
      g.column.push_back(g.index_of(states[i].swapped(tr.move.bond).str()));
      g.rate.push_back(tr.rate);
      exit += tr.rate;
    }
    g.exit_rate.push_back(exit);
    g.row_start.push_back(g.column.size());
  }
  return g;
}

}  // namespace detail

/// Generator of the FEP on E_N (or E_N^k), or of the SEP on the matching
/// spaces Omega_{k+2}^{2k-N+2}, enumerated directly from the SEP side.
inline Generator exact_generator(std::size_t N, std::optional<std::size_t> k, const Params& params, Side side) {
  const std::vector<std::size_t> ks = k ? std::vector<std::size_t>{*k} : admissible_particle_numbers(N);
  if (side == Side::fep) {
    std::vector<Configuration> states;
    for (std::size_t kk : ks) {
      auto part = enumerate_ergodic(N, kk);
      states.insert(states.end(), part.begin(), part.end());
    }
    return detail::build_generator(states, [&](const Configuration& c) { return fep_transitions(c, params); });
  }
  std::vector<SepConfiguration> states;
  for (std::size_t kk : ks) {
    if (2 * kk + 2 < N) continue;
    const std::size_t M = kk + 2, ell = 2 * kk + 2 - N;
    std::size_t count = 1;  // binomial(M-1, ell), guarded against the cap
    for (std::size_t i = 0; i < ell; ++i) {
      count = count * (M - 1 - i) / (i + 1);
      if (count > kStateSpaceCap) throw StateSpaceTooLarge("SEP state space exceeds the cap");
    }
    auto part = enumerate_sep(M, ell);
    states.insert(states.end(), part.begin(), part.end());
  }
  return detail::build_generator(states, [&](const SepConfiguration& c) { return sep_transitions(c, params); });
}

/// Time-t law of the chain started from p0, by uniformization.
inline std::vector<double> transient_distribution(const Generator& g, std::span<const double> p0, double t,
                                                  double tol = 1e-14) {
  const std::size_t n = g.size();
  if (p0.size() != n) throw InconsistentShape("initial law has wrong dimension");
  double lambda = 0.0;
  for (double e : g.exit_rate) lambda = std::max(lambda, e);
  std::vector<double> p(p0.begin(), p0.end());
  if (lambda == 0.0 || t == 0.0) return p;
  lambda *= 1.02;
  // Split the horizon so that each piece has a modest Poisson mean.
  const auto pieces = static_cast<std::size_t>(std::ceil(lambda * t / 30.0));
  const double dt = t / static_cast<double>(pieces);
  const double mean = lambda * dt;
  std::vector<double> term(n), next(n), acc(n);
  for (std::size_t piece = 0; piece < pieces; ++piece) {
    term = p;
    double weight = std::exp(-mean);
    double cumulative = weight;
    for (std::size_t i = 0; i < n; ++i) acc[i] = weight * term[i];
    for (std::size_t j = 1; 1.0 - cumulative > tol && j < 10000; ++j) {
      // term <- term * P with P = I + Q / lambda (row-vector convention).
      for (std::size_t i = 0; i < n; ++i) next[i] = term[i] * (1.0 - g.exit_rate[i] / lambda);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e)
          next[g.column[e]] += term[i] * g.rate[e] / lambda;
      term.swap(next);
      weight *= mean / static_cast<double>(j);
      cumulative += weight;
      for (std::size_t i = 0; i < n; ++i) acc[i] += weight * term[i];
    }
    p = acc;
  }
  return p;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// Exhaustive verification of the FEP -> SEP generator conjugation

struct CouplingMismatch {
  std::string fep_state;
  std::string sep_state;
  Move move;
  double fep_rate = 0.0;
  double sep_rate = 0.0;
  std::string reason;
};

struct CouplingReport {
  std::size_t N = 0;
  std::size_t states = 0;
  std::size_t fep_transitions = 0;
  std::size_t sep_transitions = 0;
  std::size_t verified = 0;
  std::vector<CouplingMismatch> mismatches;

  bool ok() const { return mismatches.empty() && verified == fep_transitions && verified == sep_transitions; }
};

inline constexpr std::size_t kCouplingCap = 14;

/// For every eta in E_N and every enabled FEP jump, checks that phi maps it to
/// a single nearest-neighbour SEP jump in the same direction at the same rate,
/// and that every enabled SEP jump from phi(eta) arises exactly once.
inline CouplingReport verify_coupling(std::size_t N, const Params& params) {
  if (N > kCouplingCap) throw EnumerationTooLarge("coupling verification is capped at N <= 14");
  const Params prm = params.at_scale(N);
  CouplingReport report;
  report.N = N;
  for (const auto& eta : enumerate_ergodic(N)) {
    ++report.states;
    const SepConfiguration xi = phi(eta);
    const auto fep_moves = fep_transitions(eta, prm);
    const auto sep_moves = sep_transitions(xi, prm);
    report.fep_transitions += fep_moves.size();
    report.sep_transitions += sep_moves.size();
    std::vector<int> hits(sep_moves.size(), 0);
    for (const auto& tr : fep_moves) {
      CouplingMismatch mm{eta.str(), xi.str(), tr.move, tr.rate, 0.0, {}};
      const Configuration after = eta.swapped(tr.move.bond);
      if (!is_ergodic(after)) {
        mm.reason = "FEP jump leaves the ergodic component";
        report.mismatches.push_back(mm);
        continue;
      }
      const SepConfiguration xi_after = phi(after);
      if (xi_after.size() != xi.size()) {
        mm.reason = "SEP lattice size changed";
        report.mismatches.push_back(mm);
        continue;
      }
      std::vector<std::size_t> diff;
      for (std::size_t y = 1; y < xi.size(); ++y)
        if (xi[y] != xi_after[y]) diff.push_back(y);
      if (diff.size() != 2 || diff[1] != diff[0] + 1) {
        mm.reason = "image is not a nearest-neighbour swap";
        report.mismatches.push_back(mm);
        continue;
      }
      const std::size_t y = diff[0];
      const Direction dir = xi[y] ? Direction::right : Direction::left;
      std::size_t found = sep_moves.size();
      for (std::size_t s = 0; s < sep_moves.size(); ++s)
        if (sep_moves[s].move == Move{y, dir}) found = s;
      if (found == sep_moves.size()) {
        mm.reason = "corresponding SEP jump is not enabled";
        report.mismatches.push_back(mm);
        continue;
      }
      mm.sep_rate = sep_moves[found].rate;
      if (dir != tr.move.dir) {
        mm.reason = "jump direction not preserved";
        report.mismatches.push_back(mm);
        continue;
      }
      if (sep_moves[found].rate != tr.rate) {
        mm.reason = "rates differ";
        report.mismatches.push_back(mm);
        continue;
      }
      ++hits[found];
      ++report.verified;
    }
    for (std::size_t s = 0; s < sep_moves.size(); ++s) {
      if (hits[s] != 1) {
        report.mismatches.push_back({eta.str(), xi.str(), sep_moves[s].move, 0.0, sep_moves[s].rate,
                                     hits[s] == 0 ? "SEP jump has no FEP preimage" : "SEP jump hit more than once"});
      }
    }
  }
  return report;
}

}  // namespace fep
