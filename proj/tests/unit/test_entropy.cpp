#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fep/residuals.hpp"

using namespace fep;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// Hand-built solution: the same row at every recorded time.
GridSolution frozen(Equation e, std::vector<double> row, double T, std::size_t rows, double p, double m = 1.0) {
  GridSolution s;
  s.equation = e;
  s.boundary = boundary_of(e);
  s.method = Method::godunov;
  s.p = p;
  s.m = m;
  for (std::size_t n = 0; n < rows; ++n) {
    s.times.push_back(T * static_cast<double>(n) / static_cast<double>(rows - 1));
    s.values.push_back(row);
  }
  return s;
}

double min_residual(const GridSolution& s, const std::vector<EntropyPair>& pairs, std::uint64_t seed, int draws) {
  RandomStream rng(seed, 0);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < draws; ++k) {
    const auto phi = random_test_function(rng, s.times.back());
    for (const auto& pair : pairs) worst = std::min(worst, entropy_residual(s, pair, phi));
  }
  return worst;
}

}  // namespace

TEST_CASE("entropy pairs satisfy Q' = f' F' and vanish at the lower end", "[entropy][property]") {
  for (auto flux : {FluxKind::current, FluxKind::fep}) {
    const double lo = flux_lower(flux);
    for (const auto& pair : builtin_pairs(flux)) {
      CHECK(pair.Q(lo) == 0.0);
      const double s = 1e-5;
      for (int i = 1; i < 50; ++i) {
        const double r = lo + (1.0 - lo) * i / 50.0;
        const double fd = (pair.Q(r + s) - pair.Q(r - s)) / (2 * s);
        CHECK(fd == Approx(flux_slope(flux, r) * pair.dF(r)).margin(1e-6));
        CHECK(pair.d2F(r) >= 0.0);
        const double fdF = (pair.F(r + s) - pair.F(r - s)) / (2 * s);
        CHECK(fdF == Approx(pair.dF(r)).margin(1e-6));
      }
    }
  }
}

TEST_CASE("quadratic pair flux matches its closed form", "[entropy]") {
  // F = (r - q)^2 / 2 with J: Q(r) = r^2/2 - q r - 2 r^3/3 + q r^2.
  const double q = 0.3;
  const auto pair = quadratic_pair(FluxKind::current, q);
  for (double r = 0.0; r <= 1.0; r += 0.0625)
    CHECK(pair.Q(r) == Approx(r * r / 2 - q * r - 2 * r * r * r / 3 + q * r * r).margin(1e-13));
}

TEST_CASE("ramp is a C2 convex function", "[entropy]") {
  CHECK(Ramp::value(0.0) == 0.0);
  CHECK(Ramp::value(1.0) == Approx(0.5));
  CHECK(Ramp::slope(1.0) == Approx(1.0));
  CHECK(Ramp::curvature(1.0) == 0.0);
  const double s = 1e-6;
  for (int i = -5; i <= 25; ++i) {
    const double x = i / 20.0;
    CHECK((Ramp::value(x + s) - Ramp::value(x - s)) / (2 * s) == Approx(Ramp::slope(x)).margin(1e-8));
    CHECK((Ramp::slope(x + s) - Ramp::slope(x - s)) / (2 * s) == Approx(Ramp::curvature(x)).margin(1e-6));
    CHECK(Ramp::curvature(x) >= 0.0);
  }
}

TEST_CASE("boundary pairs: invariants, convexity and the large-gamma limit", "[entropy]") {
  for (double q : {0.0, 0.5, 1.0}) {
    const auto b = make_boundary_pair(10.0, FluxKind::current);
    CHECK(b.F(q, q) == 0.0);
    CHECK(b.dF(q, q) == 0.0);
    CHECK(b.Q(q, q) == 0.0);
  }
  const auto b = make_boundary_pair(10.0, FluxKind::current);
  for (int i = 0; i < 50; ++i) {
    const double r = i / 49.0;
    CHECK(b.d2F(r, 0.3) >= 0.0);
    if (i > 0 && i < 49) {
      const double lo = (i - 1) / 49.0, hi = (i + 1) / 49.0;
      CHECK(b.F(r, 0.3) <= 0.5 * (b.F(lo, 0.3) + b.F(hi, 0.3)) + 1e-15);
    }
    const double s = 1e-6;
    if (std::abs(r - 0.3) > 2 * s)
      CHECK((b.Q(r + s, 0.3) - b.Q(r - s, 0.3)) / (2 * s) ==
            Approx(CurrentFlux::df(r) * b.dF(r, 0.3)).margin(1e-6));
  }
  const auto big = make_boundary_pair(1e4, FluxKind::current);
  CHECK(std::abs(big.Q(1.0, 0.0) - (fn_J(1.0) - fn_J(0.0))) <= 1e-3);
  CHECK(big.F(0.8, 0.2) == Approx(0.6).margin(1e-4));
  CHECK(big.Q(0.8, 0.2) == Approx(fn_J(0.8) - fn_J(0.2)).margin(1e-3));
  CHECK(big.Q(0.1, 0.2) == 0.0);
  const auto fep = make_boundary_pair(1e4, FluxKind::fep);
  CHECK(fep.Q(0.9, 0.5) == Approx(fn_h(0.9)).margin(1e-3));
  CHECK_THROWS_AS(make_boundary_pair(0.0, FluxKind::current), DomainError);
}

TEST_CASE("test functions are compactly supported bumps", "[entropy]") {
  RandomStream rng(5, 0);
  for (int k = 0; k < 100; ++k) {
    const auto phi = random_test_function(rng, 2.0);
    CHECK(phi.time.a >= 0.1);
    CHECK(phi.time.b <= 1.9);
    CHECK(phi.space.a >= 0.05);
    CHECK(phi.space.b <= 0.95);
    CHECK(phi.value(0.5 * (phi.time.a + phi.time.b), 0.5 * (phi.space.a + phi.space.b)) == Approx(1.0));
  }
  const Bump b{0.2, 0.6};
  const double s = 1e-6;
  for (double x = 0.21; x < 0.6; x += 0.05)
    CHECK((b.value(x + s) - b.value(x - s)) / (2 * s) == Approx(b.slope(x)).margin(1e-5));
}

TEST_CASE("entropy residual vanishes on smooth solutions", "[entropy]") {
  // Without drift the solution is stationary and every term cancels.
  const auto w = Profile::sample(400, [](double v) { return 0.5 + 0.3 * std::sin(pi * v); }, ProfileRange::sep);
  const auto still = solve_burgers_entropy(w, 0.0, 1.0, {1.0, 0, {}, 0});
  // Smooth Burgers flow before any shock forms.
  const auto s = Profile::sample(400, [](double v) { return 0.5 + 0.1 * std::sin(2 * pi * v); }, ProfileRange::sep);
  const auto flow = solve_burgers_entropy(s, 1.0, 1.0, {0.3, 0, {}, 1});
  RandomStream rng(11, 0);
  for (int k = 0; k < 10; ++k) {
    auto phi = random_test_function(rng, 0.3);
    phi.space = Bump{0.3 + 0.05 * rng.uniform(), 0.65 + 0.05 * rng.uniform()};
    for (const auto& pair : builtin_pairs(FluxKind::current)) {
      CHECK(std::abs(entropy_residual(flow, pair, phi)) <= 1e-3);
      CHECK(std::abs(entropy_residual(still, pair, phi)) <= 1e-3);
    }
  }
}

TEST_CASE("Godunov outputs satisfy the entropy inequalities", "[entropy]") {
  const std::size_t K = 400;
  const auto shock = Profile::sample(K, [](double v) { return v > 0.45 ? 1.0 : 0.0; }, ProfileRange::sep);
  const auto s1 = solve_burgers_entropy(shock, 1.0, 1.0, {1.0, 0, {}, 4});
  CHECK(min_residual(s1, builtin_pairs(FluxKind::current), 1, 20) >= -1e-3);

  const auto wave = Profile::sample(K, [](double v) { return 0.5 + 0.4 * std::sin(2 * pi * v); }, ProfileRange::sep);
  const auto s2 = solve_burgers_entropy(wave, 1.0, 1.0, {1.0, 0, {}, 4});
  CHECK(min_residual(s2, builtin_pairs(FluxKind::current), 2, 20) >= -1e-3);

  const auto rho = Profile::sample(K, [](double u) { return 0.75 + 0.2 * std::sin(2 * pi * u); }, ProfileRange::fep);
  const auto s3 = solve_conservation_law_entropy(rho, 1.0, {1.0, 0, {}, 4});
  CHECK(min_residual(s3, builtin_pairs(FluxKind::fep), 3, 20) >= -1e-3);
}

TEST_CASE("a non-entropic stationary shock is rejected", "[entropy]") {
  // 1 on the left, 0 on the right: a weak solution (J(0) = J(1)) whose
  // characteristics leave the discontinuity.
  std::vector<double> row(200);
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = i < 100 ? 1.0 : 0.0;
  const auto bad = frozen(Equation::burgers_dirichlet, row, 1.0, 101, 1.0);
  const auto pairs = builtin_pairs(FluxKind::current);
  const TestFunction phi{{0.1, 0.9}, {0.3, 0.7}};
  double worst = 0.0;
  for (const auto& pair : pairs) worst = std::min(worst, entropy_residual(bad, pair, phi));
  CHECK(worst < -0.01);

  std::reverse(row.begin(), row.end());
  const auto good = frozen(Equation::burgers_dirichlet, row, 1.0, 101, 1.0);
  for (const auto& pair : pairs) CHECK(entropy_residual(good, pair, phi) >= -1e-12);
}

TEST_CASE("entropy residual preconditions", "[entropy]") {
  const auto s = frozen(Equation::burgers_dirichlet, std::vector<double>(10, 0.5), 1.0, 11, 1.0);
  const auto pair = quadratic_pair(FluxKind::current, 0.5);
  CHECK_THROWS_AS(entropy_residual(s, pair, TestFunction{{0.0, 0.5}, {0.2, 0.8}}), DomainError);
  CHECK_THROWS_AS(entropy_residual(s, pair, TestFunction{{0.2, 0.5}, {0.2, 1.0}}), DomainError);
  CHECK_THROWS_AS(entropy_residual(s, quadratic_pair(FluxKind::fep, 0.75), TestFunction{{0.2, 0.5}, {0.2, 0.8}}),
                  DomainError);
}

TEST_CASE("Otto conditions hold for Godunov runs", "[entropy]") {
  const std::vector<double> gammas = {10.0, 100.0, 1000.0};
  auto phi = [](double t) { return Bump{0.05, 0.95}.value(t); };

  SECTION("Burgers side") {
    const auto w = Profile::sample(400, [](double v) { return v > 0.45 ? 1.0 : 0.0; }, ProfileRange::sep);
    const auto s = solve_burgers_entropy(w, 1.0, 1.0, {1.0, 0, {}, 10});
    const auto left = check_otto_boundary(s, Wall::left, 0.0, phi, gammas, 0.05, 1.0);
    const auto right = check_otto_boundary(s, Wall::right, 1.0, phi, gammas, 0.05, 1.0);
    CHECK(left.ok());
    CHECK(right.ok());
    CHECK(left.traces.front() == 0.0);
    CHECK(right.traces.front() == 1.0);
    CHECK(left.integrals.size() == gammas.size());
  }
  SECTION("boundary layers from constant interior data") {
    const auto w = Profile(std::vector<double>(400, 0.3), ProfileRange::sep);
    const auto s = solve_burgers_entropy(w, 1.0, 1.0, {1.0, 0, {}, 10});
    const auto left = check_otto_boundary(s, Wall::left, 0.0, phi, gammas, 0.1, 1.0);
    const auto right = check_otto_boundary(s, Wall::right, 1.0, phi, gammas, 0.1, 1.0);
    CHECK(left.ok());
    CHECK(right.ok());
    CHECK(left.max_dichotomy_gap <= 0.05);
    CHECK(right.max_dichotomy_gap <= 0.05);
  }
  SECTION("FEP side") {
    const auto r = Profile::sample(400, [](double u) { return u < 0.6 ? 0.5 : 1.0; }, ProfileRange::fep);
    const auto s = solve_conservation_law_entropy(r, 1.0, {1.0, 0, {}, 10});
    const auto left = check_otto_boundary(s, Wall::left, 0.5, phi, gammas, 0.05, 1.0);
    const auto right = check_otto_boundary(s, Wall::right, 1.0, phi, gammas, 0.05, 1.0);
    CHECK(left.ok());
    CHECK(right.ok());
    CHECK(left.traces.back() == 0.5);

    const auto c = Profile(std::vector<double>(400, 0.8), ProfileRange::fep);
    const auto sc = solve_conservation_law_entropy(c, 1.0, {1.0, 0, {}, 10});
    CHECK(check_otto_boundary(sc, Wall::left, 0.5, phi, gammas, 0.1, 1.0).ok());
    CHECK(check_otto_boundary(sc, Wall::right, 1.0, phi, gammas, 0.1, 1.0).ok());
  }
  SECTION("constant state equal to the right boundary value") {
    const auto s = frozen(Equation::burgers_dirichlet, std::vector<double>(100, 1.0), 1.0, 21, 1.0);
    const auto right = check_otto_boundary(s, Wall::right, 1.0, phi, gammas, 0.0, 1.0);
    CHECK(right.ok());
    for (double v : right.integrals) CHECK(v == 0.0);
  }
  SECTION("violations are reported") {
    const auto s = frozen(Equation::burgers_dirichlet, std::vector<double>(100, 0.7), 1.0, 21, 1.0);
    const auto left = check_otto_boundary(s, Wall::left, 0.0, phi, gammas, 0.0, 1.0);
    CHECK_FALSE(left.ok());
    CHECK(left.max_dichotomy_gap == Approx(0.3));
    for (double v : left.integrals) CHECK(v > 0.0);
  }
}

TEST_CASE("weak residual of Neumann and Robin runs", "[entropy]") {
  const WeakTestFunction cosine{[](double, double u) { return std::cos(pi * u); },
                                [](double, double u) { return -pi * std::sin(pi * u); }};
  const WeakTestFunction decaying{[](double t, double u) { return std::exp(-t) * std::cos(2 * pi * u) + u * u; },
                                  [](double t, double u) { return -2 * pi * std::exp(-t) * std::sin(2 * pi * u) + 2 * u; }};

  SECTION("constants") {
    const auto s = solve_heat_neumann(Profile(std::vector<double>(50, 0.4), ProfileRange::sep), 1.0, 1.0,
                                      {0.1, 0, {}, 0});
    CHECK(std::abs(weak_residual(s, decaying, 0.1).value) <= 1e-10);
    const auto r = solve_convection_diffusion_robin(Profile(std::vector<double>(50, 1.0), ProfileRange::fep), 1.0,
                                                    1.0, {0.1, 0, {}, 0});
    CHECK(std::abs(weak_residual(r, decaying, 0.1).value) <= 1e-10);
  }
  SECTION("heat run against cos(pi u)") {
    const auto ini = Profile::sample(400, [](double v) { return 0.5 + 0.25 * std::cos(pi * v); }, ProfileRange::sep);
    const auto s = solve_heat_neumann(ini, 1.0, 1.0, {0.1, 0, {}, 1});
    const auto r = weak_residual(s, cosine, 0.1);
    CHECK(std::abs(r.value) <= 1e-3);
    CHECK(r.h == Approx(1.0 / 400));
  }
  SECTION("fast diffusion refinement") {
    auto run = [&](std::size_t K) {
      const auto ini = Profile::sample(K, [](double u) { return 0.7 + 0.2 * std::cos(pi * u); }, ProfileRange::fep);
      const auto s = solve_fast_diffusion_neumann(ini, 1.0, {0.01, 0, {}, 1});
      return weak_residual(s, decaying, 0.01);
    };
    const auto a = run(200), b = run(400);
    CHECK(std::abs(b.value) <= 0.6 * std::abs(a.value));
    CHECK(b.constant <= 2.0 * a.constant);
  }
  SECTION("Robin runs with drift") {
    const auto ini = Profile::sample(200, [](double v) { return 0.3 + 0.4 * v; }, ProfileRange::sep);
    const auto s = solve_viscous_burgers_robin(ini, 1.0, 2.0, 0.8, {0.05, 0, {}, 1});
    CHECK(std::abs(weak_residual(s, decaying, 0.05).value) <= 1e-2);
  }
  SECTION("wrong boundary type") {
    const auto s = frozen(Equation::burgers_dirichlet, std::vector<double>(10, 0.5), 1.0, 3, 1.0);
    CHECK_THROWS_AS(weak_residual(s, cosine, 1.0), DomainError);
  }
}
