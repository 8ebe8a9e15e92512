#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "fep/lattice.hpp"

using namespace fep;
using Catch::Approx;

namespace {

Configuration cfg(const char* s) { return Configuration::parse(s); }

// Binary strings of length n without two adjacent zeros, by dynamic programming.
std::size_t count_no_adjacent_zeros(std::size_t n) {
  std::size_t end1 = 1, end0 = 1;  // length 1
  if (n == 0) return 1;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t n1 = end1 + end0, n0 = end1;
    end1 = n1;
    end0 = n0;
  }
  return end1 + end0;
}

bool brute_ergodic(const std::vector<std::uint8_t>& v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i] + v[i + 1] < 1) return false;
  return true;
}

}  // namespace

TEST_CASE("configuration text form round-trips", "[lattice]") {
  const auto c = cfg("110101");
  CHECK(c.size() == 7);
  CHECK(c.sites() == 6);
  CHECK(c.str() == "110101");
  CHECK(c[1]);
  CHECK_FALSE(c[3]);
  CHECK_THROWS_AS(Configuration::parse("12"), ParseError);
  CHECK_THROWS_AS(c.at(0), IndexError);
  CHECK_THROWS_AS(c.at(7), IndexError);
}

TEST_CASE("bit packing is invisible across word boundaries", "[lattice]") {
  std::mt19937_64 gen(3);
  for (std::size_t N : {2u, 63u, 64u, 65u, 66u, 129u, 300u}) {
    std::vector<std::uint8_t> v(N - 1);
    for (auto& b : v) b = gen() & 1u;
    const Configuration c(N, v);
    CHECK(c.to_vector() == v);
    std::size_t ones = 0;
    for (auto b : v) ones += b;
    CHECK(c.count() == ones);
    CHECK(is_ergodic(c) == brute_ergodic(v));
    if (N >= 3) {
      const auto s = c.swapped(N / 2);
      CHECK(s[N / 2] == c[N / 2 + 1]);
      CHECK(s[N / 2 + 1] == c[N / 2]);
    }
  }
}

TEST_CASE("is_ergodic examples", "[lattice]") {
  CHECK(is_ergodic(cfg("111111")));
  CHECK(is_ergodic(cfg("110101")));
  CHECK_FALSE(is_ergodic(cfg("100111")));
  CHECK(is_ergodic(cfg("010")));
  CHECK_FALSE(is_ergodic(cfg("00")));
}

TEST_CASE("ergodicity holds across packed words", "[lattice]") {
  std::string s(130, '1');
  s[63] = '0';
  CHECK(is_ergodic(Configuration::parse(s)));
  s[64] = '0';
  CHECK_FALSE(is_ergodic(Configuration::parse(s)));
  s[64] = '1';
  s[128] = '0';
  s[129] = '0';
  CHECK_FALSE(is_ergodic(Configuration::parse(s)));
}

TEST_CASE("particle_count examples", "[lattice]") {
  CHECK(particle_count(cfg("110101")) == 4);
  CHECK(particle_count(cfg("111111")) == 6);
  CHECK(particle_count(cfg("000000")) == 0);
}

TEST_CASE("enumerate_ergodic examples", "[lattice]") {
  CHECK(enumerate_ergodic(15, 9).size() == 252);
  const auto four = enumerate_ergodic(4, 1);
  REQUIRE(four.size() == 1);
  CHECK(four[0].str() == "010");
  CHECK(enumerate_ergodic(3, 0).empty());
  CHECK_THROWS_AS(enumerate_ergodic(21), EnumerationTooLarge);
}

TEST_CASE("enumeration count matches the no-adjacent-zeros recurrence", "[lattice][property]") {
  for (std::size_t N = 2; N <= 18; ++N) {
    const auto all = enumerate_ergodic(N);
    CHECK(all.size() == count_no_adjacent_zeros(N - 1));
    CHECK(std::is_sorted(all.begin(), all.end()));
    for (const auto& c : all) REQUIRE(is_ergodic(c));
  }
}

TEST_CASE("enumeration is empty below the critical particle number", "[lattice]") {
  for (std::size_t N = 2; N <= 16; ++N)
    for (std::size_t k = 0; k < N; ++k) CHECK(enumerate_ergodic(N, k).empty() == (k < (N - 1) / 2));
}

TEST_CASE("ergodicity is reflection invariant", "[lattice][property]") {
  for (std::size_t N = 2; N <= 12; ++N) {
    for (std::uint32_t bits = 0; bits < (1u << (N - 1)); ++bits) {
      std::vector<std::uint8_t> v(N - 1);
      for (std::size_t i = 0; i < N - 1; ++i) v[i] = (bits >> i) & 1u;
      const Configuration c(N, v);
      REQUIRE(is_ergodic(c) == is_ergodic(c.reflected()));
    }
  }
}

TEST_CASE("empirical_density examples", "[lattice]") {
  CHECK(empirical_density(Configuration::filled(10), 3).values == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(empirical_density(Configuration(10), 3).values == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(empirical_density(cfg("10101011"), 2).values == std::vector<double>{0.5, 0.75});
  CHECK_THROWS_AS(empirical_density(cfg("1"), 0), DomainError);
}

TEST_CASE("empty cells hold zero", "[lattice]") {
  const auto d = empirical_density(Configuration::filled(3), 8);
  double s = 0;
  for (double v : d.values) s += v;
  CHECK(s == 2.0);
}

TEST_CASE("test_function_pairing examples", "[lattice]") {
  CHECK(test_function_pairing(Configuration::filled(10), [](double) { return 1.0; }) == Approx(0.9));
  const auto c = cfg("1001");
  CHECK(test_function_pairing(c, [](double u) { return u; }) == Approx(0.2));
  CHECK(test_function_pairing(cfg("110101"), [](double) { return 1.0; }) == Approx(4.0 / 7.0));
}

TEST_CASE("cell values are pairings against cell indicators", "[lattice][property]") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t N = 5 + gen() % 200, K = 1 + gen() % 17;
    std::vector<std::uint8_t> v(N - 1);
    for (auto& b : v) b = gen() & 1u;
    const Configuration c(N, v);
    const auto d = empirical_density(c, K);
    const auto sites = sites_per_cell(N, K);
    for (std::size_t j = 0; j < K; ++j) {
      if (sites[j] == 0) continue;
      // Indicator of cell j under the same site-to-cell rule.
      const double pairing = test_function_pairing(c, [&](double u) {
        const auto x = static_cast<std::size_t>(std::llround(u * static_cast<double>(N)));
        return cell_of_site(x, N, K) == j ? 1.0 : 0.0;
      });
      const double n = static_cast<double>(N), s = static_cast<double>(sites[j]);
      // The particle count behind both sides agrees exactly; the ratios agree to rounding.
      CHECK(std::llround(pairing * n) == std::llround(d.values[j] * s));
      CHECK(std::abs(pairing * n / s - d.values[j]) <= 2 * std::numeric_limits<double>::epsilon());
    }
  }
}

TEST_CASE("params derive the time scale and regime", "[lattice]") {
  const auto s = Params::make(1.0, 0.0, 1.0, 100);
  CHECK(s.regime == Regime::sfep);
  CHECK(static_cast<double>(s.theta) == 10000.0);
  const auto w = Params::make(1.0, 1.0, 1.0, 100);
  CHECK(w.regime == Regime::wafep);
  CHECK(w.right_rate() == Approx(1.01 * 10000.0));
  CHECK(w.left_rate() == 10000.0);
  const auto v = Params::make(1.0, 1.0, 2.0, 100);
  CHECK(v.regime == Regime::vwafep);
  CHECK(static_cast<double>(v.theta) == 10000.0);
  const auto a = Params::make(1.0, 1.0, 0.75, 16);
  CHECK(a.regime == Regime::afepvv);
  CHECK(static_cast<double>(a.theta) == Approx(std::pow(16.0, 1.75)));
  CHECK(static_cast<double>(a.theta) == 128.0);
  CHECK_THROWS_AS(Params::make(0.0, 1.0, 1.0, 10), DomainError);
  CHECK_THROWS_AS(Params::make(1.0, -1.0, 1.0, 10), DomainError);
  CHECK(parse_regime("wafep") == Regime::wafep);
  CHECK_THROWS_AS(parse_regime("tasep"), ParseError);
}
