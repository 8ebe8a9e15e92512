#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fep/dynamics.hpp"

using namespace fep;
using Catch::Approx;

namespace {

Configuration cfg(const char* s) { return Configuration::parse(s); }

// Enabled moves read straight off the constraint products, walls included.
std::set<std::pair<std::size_t, int>> constraint_moves(const Configuration& c) {
  std::set<std::pair<std::size_t, int>> out;
  const std::size_t N = c.size();
  auto e = [&](std::size_t x) -> int { return (x == 0 || x >= N) ? 1 : c[x]; };
  for (std::size_t x = 1; x + 2 <= N; ++x) {
    if (e(x - 1) * e(x) * (1 - e(x + 1)) == 1) out.insert({x, 0});
    if ((1 - e(x)) * e(x + 1) * e(x + 2) == 1) out.insert({x, 1});
  }
  return out;
}

template <class Table>
std::set<std::pair<std::size_t, int>> table_moves(const Table& t) {
  std::set<std::pair<std::size_t, int>> out;
  for (std::size_t b = 1; b + 2 <= t.size(); ++b) {
    if (t.rate(b, Direction::right) > 0) out.insert({b, 0});
    if (t.rate(b, Direction::left) > 0) out.insert({b, 1});
  }
  return out;
}

// Dense matrix exponential by scaling and squaring of a Taylor polynomial.
std::vector<double> dense_transient(const Generator& g, const std::vector<double>& p0, double t) {
  const std::size_t n = g.size();
  std::vector<double> A(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[i * n + j] = g.entry(i, j) * t;
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(A[i * n + j]);
    norm = std::max(norm, r);
  }
  int squarings = 0;
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (double& a : A) a *= scale;
  std::vector<double> E(n * n, 0.0), term(n * n, 0.0), tmp(n * n);
  for (std::size_t i = 0; i < n; ++i) E[i * n + i] = term[i * n + i] = 1.0;
  auto mul = [n](const std::vector<double>& X, const std::vector<double>& Y, std::vector<double>& Z) {
    std::fill(Z.begin(), Z.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (X[i * n + k] != 0.0)
          for (std::size_t j = 0; j < n; ++j) Z[i * n + j] += X[i * n + k] * Y[k * n + j];
  };
  for (int k = 1; k <= 18; ++k) {
    mul(term, A, tmp);
    for (std::size_t i = 0; i < n * n; ++i) term[i] = tmp[i] / k;
    for (std::size_t i = 0; i < n * n; ++i) E[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) {
    mul(E, E, tmp);
    E.swap(tmp);
  }
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p[j] += p0[i] * E[i * n + j];
  return p;
}

}  // namespace

TEST_CASE("enabled moves of small configurations", "[dynamics]") {
  const auto p = Params::make(1.0, 1.0, 1.0, 4);
  const auto four = fep_transitions(cfg("110"), p);
  REQUIRE(four.size() == 1);
  CHECK(four[0].move == Move{2, Direction::right});
  CHECK(four[0].rate == p.right_rate());

  CHECK(fep_transitions(Configuration::filled(7), p.at_scale(7)).empty());

  // Only right 2->3 and left 6->5 are enabled: the left jump 4->3 would need
  // site 5 occupied.
  const auto seven = fep_transitions(cfg("110101"), p.at_scale(7));
  REQUIRE(seven.size() == 2);
  CHECK(seven[0].move == Move{2, Direction::right});
  CHECK(seven[1].move == Move{5, Direction::left});
  CHECK(sep_transitions(phi(cfg("110101")), p.at_scale(7)).size() == 2);
}

TEST_CASE("rate table agrees with the constraint products", "[dynamics][property]") {
  const auto p = Params::make(1.0, 0.5, 1.0, 11);
  for (const auto& c : enumerate_ergodic(11)) {
    RateTable t(c, p);
    const auto expected = constraint_moves(c);
    REQUIRE(table_moves(t) == expected);
    std::size_t r = 0;
    for (const auto& m : expected) r += m.second == 0;
    REQUIRE(t.total() == Approx(static_cast<double>(r) * p.right_rate() +
                                static_cast<double>(expected.size() - r) * p.left_rate()));
  }
}

TEST_CASE("local updates keep the table consistent along a run", "[dynamics]") {
  const auto p = Params::make(1.0, 1.0, 1.0, 40);
  auto c = Configuration::parse("101101110110111011010111101101101110110");
  REQUIRE(is_ergodic(c));
  RateTable t(c, p);
  RandomStream rng(1, 2);
  for (int i = 0; i < 3000; ++i) {
    const auto step = fep_step(c, t, rng);
    REQUIRE(step);
    REQUIRE(step->elapsed > 0);
    REQUIRE(c.swapped(step->move.bond) == step->next);
    REQUIRE(constraint_moves(c).count({step->move.bond, static_cast<int>(step->move.dir)}) == 1);
    c = step->next;
    REQUIRE(is_ergodic(c));
    REQUIRE(table_moves(t) == constraint_moves(c));
  }
}

TEST_CASE("fep_step signals an absorbing state", "[dynamics]") {
  const auto full = Configuration::filled(9);
  RateTable t(full, Params::make(1, 0, 1, 9));
  RandomStream rng(0, 0);
  CHECK_FALSE(fep_step(full, t, rng).has_value());
  CHECK_THROWS_AS(fep_step(cfg("1001111"), t, rng), DomainError);
}

TEST_CASE("absorbing trajectories are constant", "[dynamics]") {
  const auto full = Configuration::filled(12);
  const auto tr = fep_simulate(full, Params::make(1, 1, 1, 12), {1.0, {0.1, 0.5, 1.0}, 3, 0, true});
  CHECK(tr.absorbed);
  CHECK(tr.event_count == 0);
  for (const auto& s : tr.snapshots) CHECK(s == full);
}

TEST_CASE("simulation preconditions", "[dynamics]") {
  const auto p = Params::make(1, 0, 1, 7);
  CHECK_THROWS_AS(fep_simulate(cfg("100111"), p, {0.1, {}, 1, 0, false}), DomainError);
  CHECK_THROWS_AS(fep_simulate(cfg("111111"), p, {0.1, {0.2}, 1, 0, false}), DomainError);
  CHECK_THROWS_AS(fep_simulate(cfg("111111"), p, {0.1, {0.05, 0.01}, 1, 0, false}), DomainError);
  CHECK_THROWS_AS(fep_simulate(cfg("1111111"), p, {0.1, {}, 1, 0, false}), InconsistentShape);
}

TEST_CASE("trajectories conserve particles, stay ergodic, and replay exactly", "[dynamics][property]") {
  RandomStream pick(77, 0);
  for (int run = 0; run < 200; ++run) {
    const std::size_t N = 8 + pick.below(60);
    std::vector<std::uint8_t> v(N - 1, 1);
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i - 1] && pick.uniform() < 0.4) v[i] = 0;
    const Configuration init(N, v);
    const double kappa = 0.5 + 1.5 * pick.uniform();
    const auto p = Params::make(0.5 + pick.uniform(), pick.uniform() < 0.3 ? 0.0 : 2 * pick.uniform(), kappa, N);
    const SimulationOptions opt{0.02, {0.0, 0.005, 0.01, 0.02}, 1234, static_cast<std::uint64_t>(run), true};
    const auto tr = fep_simulate(init, p, opt);
    for (const auto& s : tr.snapshots) {
      REQUIRE(s.count() == init.count());
      REQUIRE(is_ergodic(s));
    }
    CHECK(tr.snapshots.front() == init);
    // Replay the event log.
    Configuration c = init;
    double last = 0.0;
    for (const auto& e : tr.events) {
      REQUIRE(e.time > last);
      last = e.time;
      REQUIRE(constraint_moves(c).count({e.move.bond, static_cast<int>(e.move.dir)}) == 1);
      c = c.swapped(e.move.bond);
    }
    CHECK(c == tr.final_state);
    CHECK(tr.event_count == tr.events.size());
    const auto again = fep_simulate<FenwickRates>(init, p, opt);
    const auto again2 = fep_simulate<ClassRates>(init, p, opt);
    CHECK(again2.final_state == tr.final_state);
    CHECK(again2.event_count == tr.event_count);
    // Different selectors consume the same clocks; the selected moves may differ.
    CHECK(again.snapshots.size() == tr.snapshots.size());
  }
}

TEST_CASE("SEP trajectories conserve particles", "[dynamics]") {
  const auto xi = SepConfiguration::parse("1100101101");
  const auto p = Params::make(1, 1, 1, 16);
  const auto tr = sep_simulate(xi, p, {0.5, {0.1, 0.2, 0.5}, 5, 0, false});
  for (const auto& s : tr.snapshots) CHECK(s.count() == xi.count());
  CHECK(tr.event_count > 0);
}

TEST_CASE("exact generators have zero row sums and match the dense oracle", "[dynamics]") {
  const auto p = Params::make(1.0, 1.0, 1.0, 7);
  const auto g = exact_generator(7, std::nullopt, p, Side::fep);
  CHECK(g.size() == enumerate_ergodic(7).size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.entry(i, j);
    CHECK(std::abs(s) <= 1e-9 * g.exit_rate[i] + 1e-12);
  }
  std::vector<double> p0(g.size(), 1.0 / static_cast<double>(g.size()));
  const auto a = transient_distribution(g, p0, 0.05);
  const auto b = dense_transient(g, p0, 0.05);
  CHECK(total_variation(a, b) < 1e-10);
  double total = 0.0;
  for (double x : a) total += x;
  CHECK(total == Approx(1.0).epsilon(1e-12));

  const auto gs = exact_generator(7, 4, p, Side::sep);
  CHECK(gs.size() == 10);  // Omega_6^3
  std::vector<double> q0(gs.size(), 0.0);
  q0[0] = 1.0;
  CHECK(total_variation(transient_distribution(gs, q0, 0.05), dense_transient(gs, q0, 0.05)) < 1e-10);
}

TEST_CASE("FEP and SEP generators are conjugate under phi", "[dynamics][property]") {
  for (std::size_t N = 3; N <= 12; ++N) {
    const auto p = Params::make(1.3, 0.7, 0.9, N);
    for (std::size_t k : admissible_particle_numbers(N)) {
      const auto gf = exact_generator(N, k, p, Side::fep);
      const auto gs = exact_generator(N, k, p, Side::sep);
      REQUIRE(gf.size() == gs.size());
      std::vector<std::size_t> perm(gf.size());
      for (std::size_t i = 0; i < gf.size(); ++i) perm[i] = gs.index_of(phi(Configuration::parse(gf.states[i])).str());
      for (std::size_t i = 0; i < gf.size(); ++i) {
        REQUIRE(gf.exit_rate[i] == gs.exit_rate[perm[i]]);
        for (std::size_t e = gf.row_start[i]; e < gf.row_start[i + 1]; ++e)
          REQUIRE(gf.rate[e] == gs.entry(perm[i], perm[gf.column[e]]));
      }
    }
  }
}

TEST_CASE("symmetric FEP swaps are reversible at equal rate", "[dynamics]") {
  const auto p = Params::make(2.0, 0.0, 1.0, 10);
  const auto g = exact_generator(10, std::nullopt, p, Side::fep);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t e = g.row_start[i]; e < g.row_start[i + 1]; ++e) {
      const double back = g.entry(g.column[e], i);
      if (back > 0) {
        CHECK(back == g.rate[e]);
        ++pairs;
      }
    }
  CHECK(pairs > 0);
}

TEST_CASE("state-space cap", "[dynamics]") {
  CHECK_THROWS_AS(exact_generator(25, std::nullopt, Params::make(1, 0, 1, 25), Side::fep), EnumerationTooLarge);
  CHECK_THROWS_AS(exact_generator(60, 40, Params::make(1, 0, 1, 60), Side::sep), StateSpaceTooLarge);
}

TEST_CASE("coupling verifier", "[dynamics]") {
  for (std::size_t N : {3u, 7u, 10u}) {
    const auto r = verify_coupling(N, Params::make(1, 1, 1, N));
    CHECK(r.ok());
    CHECK(r.verified > 0);
    CHECK(r.states == enumerate_ergodic(N).size());
  }
  CHECK_THROWS_AS(verify_coupling(15, Params::make(1, 1, 1, 15)), EnumerationTooLarge);
}

TEST_CASE("single SEP particle equilibrates uniformly", "[dynamics]") {
  // Reflecting symmetric walk on sites 1..5: the stationary law is uniform.
  const std::size_t replicas = 20000;
  std::vector<double> hist(5, 0.0);
  const auto p = Params::make(1.0, 0.0, 1.0, 6);
  const auto start = SepConfiguration::parse("10000");
  for (std::size_t r = 0; r < replicas; ++r) {
    const auto tr = sep_simulate(start, p, {1.0, {}, 99, r, false});
    for (std::size_t y = 1; y < 6; ++y)
      if (tr.final_state[y]) hist[y - 1] += 1.0 / replicas;
  }
  double tv = 0.0;
  for (double h : hist) tv += 0.5 * std::abs(h - 0.2);
  CHECK(tv <= 0.03);
}
