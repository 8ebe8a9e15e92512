#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fep/error.hpp"
#include "fep/mapping.hpp"

namespace fep {

// ---------------------------------------------------------------------------
// Constitutive functions

namespace detail {
inline void require_range(double r, double lo, const char* name) {
  constexpr double slack = 1e-12;
  if (!(r >= lo - slack && r <= 1.0 + slack))
    throw DomainError(std::string(name) + " is defined on [" + (lo == 0.0 ? "0" : "1/2") + ", 1], got " +
                      format_double(r));
}
}  // namespace detail

/// a(r) = (2r - 1) / r, r in [1/2, 1].
inline double fn_a(double r) {
  detail::require_range(r, 0.5, "a");
  return (2.0 * r - 1.0) / r;
}
/// h(r) = (1 - r)(2r - 1) / r, r in [1/2, 1].
inline double fn_h(double r) {
  detail::require_range(r, 0.5, "h");
  return (1.0 - r) * (2.0 * r - 1.0) / r;
}
/// J(w) = w (1 - w), w in [0, 1].
inline double fn_J(double w) {
  detail::require_range(w, 0.0, "J");
  return w * (1.0 - w);
}
inline double fn_a_prime(double r) {
  detail::require_range(r, 0.5, "a'");
  return 1.0 / (r * r);
}
inline double fn_h_prime(double r) {
  detail::require_range(r, 0.5, "h'");
  return 1.0 / (r * r) - 2.0;
}
inline double fn_J_prime(double w) {
  detail::require_range(w, 0.0, "J'");
  return 1.0 - 2.0 * w;
}

/// Concave flux J on [0,1]; maximum at 1/2.
struct CurrentFlux {
  static constexpr double lower = 0.0;
  static constexpr double peak = 0.5;
  static constexpr double max_slope = 1.0;
  static double f(double w) { return w * (1.0 - w); }
  static double df(double w) { return 1.0 - 2.0 * w; }
};

/// Concave flux h on [1/2,1]; maximum at 1/sqrt(2).
struct FepFlux {
  static constexpr double lower = 0.5;
  static constexpr double peak = 0.70710678118654752440;
  static constexpr double max_slope = 2.0;  // |h'(1/2)|
  static double f(double r) { return (1.0 - r) * (2.0 * r - 1.0) / r; }
  static double df(double r) { return 1.0 / (r * r) - 2.0; }
};

/// Exact Riemann (Godunov) flux for a concave f: min over [a,b] if a <= b,
/// max over [b,a] otherwise.
template <class Flux>
double godunov_flux(double a, double b) {
  if (a <= b) return std::min(Flux::f(a), Flux::f(b));
  if (b <= Flux::peak && Flux::peak <= a) return Flux::f(Flux::peak);
  return std::max(Flux::f(a), Flux::f(b));
}

// ---------------------------------------------------------------------------
// Grid solutions

enum class Equation {
  heat_neumann,
  fast_diffusion_neumann,
  viscous_burgers_robin,
  convection_diffusion_robin,
  burgers_dirichlet,
  conservation_law_dirichlet,
};

enum class Boundary { neumann, robin, dirichlet_entropy };
enum class Method { explicit_fv, godunov, viscosity };

inline std::string_view to_string(Equation e) {
  switch (e) {
    case Equation::heat_neumann: return "heat-neumann";
    case Equation::fast_diffusion_neumann: return "fast-diffusion-neumann";
    case Equation::viscous_burgers_robin: return "viscous-burgers-robin";
    case Equation::convection_diffusion_robin: return "convection-diffusion-robin";
    case Equation::burgers_dirichlet: return "burgers-dirichlet";
    case Equation::conservation_law_dirichlet: return "conservation-law-dirichlet";
  }
  return "?";
}

inline Equation parse_equation(std::string_view s) {
  for (auto e : {Equation::heat_neumann, Equation::fast_diffusion_neumann, Equation::viscous_burgers_robin,
                 Equation::convection_diffusion_robin, Equation::burgers_dirichlet,
                 Equation::conservation_law_dirichlet})
    if (to_string(e) == s) return e;
  throw ParseError("unknown equation '" + std::string(s) + "'");
}

inline std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::neumann: return "neumann";
    case Boundary::robin: return "robin";
    case Boundary::dirichlet_entropy: return "dirichlet-entropy";
  }
  return "?";
}

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::explicit_fv: return "explicit-fv";
    case Method::godunov: return "godunov";
    case Method::viscosity: return "viscosity";
  }
  return "?";
}

inline Boundary boundary_of(Equation e) {
  switch (e) {
    case Equation::heat_neumann:
    case Equation::fast_diffusion_neumann: return Boundary::neumann;
    case Equation::viscous_burgers_robin:
    case Equation::convection_diffusion_robin: return Boundary::robin;
    default: return Boundary::dirichlet_entropy;
  }
}

/// True for the equations posed on the FEP side (unknown rho in [1/2,1]).
inline bool fep_side(Equation e) {
  return e == Equation::fast_diffusion_neumann || e == Equation::convection_diffusion_robin ||
         e == Equation::conservation_law_dirichlet;
}

struct GridSolution {
  Equation equation = Equation::heat_neumann;
  Boundary boundary = Boundary::neumann;
  Method method = Method::explicit_fv;
  double sigma = 0.0;
  double p = 0.0;
  double m = 1.0;
  double epsilon = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  ///< one row per time

  std::size_t cells() const { return values.empty() ? 0 : values.front().size(); }
  double width() const { return 1.0 / static_cast<double>(cells()); }
  ProfileRange range() const { return fep_side(equation) ? ProfileRange::fep : ProfileRange::sep; }

  Profile profile(std::size_t row) const { return Profile::clamped(values.at(row), range(), 1e-10); }
  const std::vector<double>& final_values() const { return values.back(); }
  Profile final_profile() const { return profile(values.size() - 1); }

  /// Row recorded at time t (exact match within 1e-12).
  std::size_t row_at(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
    throw IndexError("time " + format_double(t) + " was not recorded");
  }

  double mass(std::size_t row) const {
    double s = 0.0;
    for (double v : values[row]) s += v;
    return s * width();
  }
};

struct SolveOptions {
  double t_end = 0.0;
  double dt = 0.0;                    ///< 0: largest admissible step
  std::vector<double> output_times;   ///< rows in addition to t = 0 and t_end
  std::size_t record_every = 0;       ///< also record every n-th step
};

// ---------------------------------------------------------------------------
// Generic explicit finite-volume stepper
//
//   d/dt x_i = -(F_{i+1/2} - F_{i-1/2}) / h
//   F = -D (A(x_{i+1}) - A(x_i)) / h + c f_num(x_i, x_{i+1})
//
// Zero-flux walls realise the Neumann and Robin conditions (the total flux is
// the conserved current). Dirichlet walls use ghost values: Godunov for the
// convective part and a half-cell gradient for the diffusive part.

namespace detail {

struct Identity {
  static double A(double x) { return x; }
  static constexpr double max_slope = 1.0;
};
struct FastDiffusion {
  static double A(double r) { return (2.0 * r - 1.0) / r; }
  static constexpr double max_slope = 4.0;  // a'(1/2)
};

inline double admissible_dt(double h, double D, double A_slope, double c, double L, double wall_factor) {
  const double rate = wall_factor * D * A_slope / (h * h) + c * L / h;
  return rate > 0.0 ? 0.45 / rate : std::numeric_limits<double>::infinity();
}

enum class Convective { none, central, godunov };

template <class Diffusion, class Flux>
GridSolution run_fv(std::vector<double> x, GridSolution sol, double D, double c, Convective conv, bool dirichlet,
                    double left_value, double right_value, const SolveOptions& opt) {
  const std::size_t K = x.size();
  if (K < 2) throw DomainError("at least two cells are required");
  if (!(opt.t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
  const double h = 1.0 / static_cast<double>(K);
  const double wall = dirichlet && D > 0.0 ? 1.5 : 1.0;
  const double L = conv == Convective::none ? 0.0 : Flux::max_slope;
  const double bound = admissible_dt(h, D, Diffusion::max_slope, c, L, wall);
  double dt = opt.dt;
  if (dt == 0.0) dt = std::isfinite(bound) ? bound : std::max(h, opt.t_end / 100.0);
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (dt > bound * (1.0 + 1e-12))
    throw StabilityError("time step " + format_double(dt) + " exceeds the admissible bound", bound);

  std::vector<double> outs = opt.output_times;
  for (double t : outs)
    if (t < 0.0 || t > opt.t_end) throw DomainError("output times must lie in [0, t_end]");
  outs.push_back(opt.t_end);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

  const double lo = Flux::lower;
  constexpr double tol = 1e-10;
  auto check = [&](const std::vector<double>& v, double t) {
    for (double y : v)
      if (!(y >= lo - tol && y <= 1.0 + tol))
        throw SchemeFailure("value " + format_double(y) + " left the invariant region at t=" + format_double(t));
  };
  check(x, 0.0);

  sol.dt = dt;
  sol.times.push_back(0.0);
  sol.values.push_back(x);

  std::vector<double> A(K), F(K + 1, 0.0);
  auto num_flux = [&](double a, double b) {
    switch (conv) {
      case Convective::none: return 0.0;
      case Convective::central: return 0.5 * (Flux::f(a) + Flux::f(b));
      case Convective::godunov: return godunov_flux<Flux>(a, b);
    }
    return 0.0;
  };
  const double A_left = dirichlet ? Diffusion::A(left_value) : 0.0;
  const double A_right = dirichlet ? Diffusion::A(right_value) : 0.0;

  double t = 0.0;
  std::size_t next_out = outs.front() == 0.0 ? 1 : 0;
  std::size_t step = 0;
  while (next_out < outs.size()) {
    const double target = outs[next_out];
    double tau = dt;
    bool lands = false;
    if (t + dt >= target * (1.0 - 1e-14)) {
      tau = target - t;
      lands = true;
    }
    if (tau > 0.0) {
      for (std::size_t i = 0; i < K; ++i) A[i] = Diffusion::A(x[i]);
      for (std::size_t i = 1; i < K; ++i) F[i] = -D * (A[i] - A[i - 1]) / h + c * num_flux(x[i - 1], x[i]);
      if (dirichlet) {
        F[0] = -D * (A[0] - A_left) / (0.5 * h) + c * num_flux(left_value, x[0]);
        F[K] = -D * (A_right - A[K - 1]) / (0.5 * h) + c * num_flux(x[K - 1], right_value);
      } else {
        F[0] = 0.0;
        F[K] = 0.0;
      }
      const double lambda = tau / h;
      for (std::size_t i = 0; i < K; ++i) x[i] -= lambda * (F[i + 1] - F[i]);
      ++step;
      t = lands ? target : t + tau;
      check(x, t);
    } else {
      t = target;
    }
    if (lands || tau <= 0.0) {
      sol.times.push_back(t);
      sol.values.push_back(x);
      ++next_out;
    } else if (opt.record_every && step % opt.record_every == 0) {
      sol.times.push_back(t);
      sol.values.push_back(x);
    }
  }
  sol.steps = step;
  return sol;
}

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw DomainError(std::string(name) + " must be positive");
}

inline Convective robin_convection(double c, double L, double h, double D_min) {
  if (c == 0.0) return Convective::none;
  return c * L * h <= 2.0 * D_min ? Convective::central : Convective::godunov;
}

}  // namespace detail

/// Largest admissible explicit step for an equation on K cells.
inline double admissible_dt(Equation e, std::size_t K, double sigma, double p, double m, double epsilon = 0.0) {
  const double h = 1.0 / static_cast<double>(K);
  switch (e) {
    case Equation::heat_neumann: return detail::admissible_dt(h, sigma / (m * m), 1.0, 0.0, 0.0, 1.0);
    case Equation::fast_diffusion_neumann: return detail::admissible_dt(h, sigma, 4.0, 0.0, 0.0, 1.0);
    case Equation::viscous_burgers_robin:
      return detail::admissible_dt(h, sigma / (m * m), 1.0, p / m, p > 0 ? 1.0 : 0.0, 1.0);
    case Equation::convection_diffusion_robin: return detail::admissible_dt(h, sigma, 4.0, p, p > 0 ? 2.0 : 0.0, 1.0);
    case Equation::burgers_dirichlet:
      return detail::admissible_dt(h, epsilon / (m * m), 1.0, p / m, 1.0, epsilon > 0 ? 1.5 : 1.0);
    case Equation::conservation_law_dirichlet:
      return detail::admissible_dt(h, epsilon, 4.0, p, 2.0, epsilon > 0 ? 1.5 : 1.0);
  }
  return 0.0;
}

/// d_t w = (sigma/m^2) d_v^2 w, d_v w = 0 at v = 0, 1.
inline GridSolution solve_heat_neumann(const Profile& omega, double sigma, double m, const SolveOptions& opt) {
  detail::require_positive(sigma, "sigma");
  detail::require_positive(m, "m");
  GridSolution s;
  s.equation = Equation::heat_neumann;
  s.boundary = Boundary::neumann;
  s.sigma = sigma;
  s.m = m;
  return detail::run_fv<detail::Identity, CurrentFlux>(omega.values(), s, sigma / (m * m), 0.0,
                                                      detail::Convective::none, false, 0, 0, opt);
}

/// d_t rho = sigma d_u^2 a(rho), d_u a(rho) = 0 at u = 0, 1.
inline GridSolution solve_fast_diffusion_neumann(const Profile& rho, double sigma, const SolveOptions& opt) {
  detail::require_positive(sigma, "sigma");
  for (double r : rho.values())
    if (!(r > 0.5)) throw DomainError("fast diffusion requires rho in (1/2, 1]");
  GridSolution s;
  s.equation = Equation::fast_diffusion_neumann;
  s.boundary = Boundary::neumann;
  s.sigma = sigma;
  return detail::run_fv<detail::FastDiffusion, FepFlux>(rho.values(), s, sigma, 0.0, detail::Convective::none, false,
                                                        0, 0, opt);
}

/// d_t w = (sigma/m^2) d_v^2 w - (p/m) d_v J(w), zero total flux at the walls.
inline GridSolution solve_viscous_burgers_robin(const Profile& omega, double sigma, double p, double m,
                                                const SolveOptions& opt) {
  detail::require_positive(sigma, "sigma");
  detail::require_positive(m, "m");
  if (!(p >= 0.0)) throw DomainError("p must be nonnegative");
  const double D = sigma / (m * m), c = p / m;
  GridSolution s;
  s.equation = Equation::viscous_burgers_robin;
  s.boundary = Boundary::robin;
  s.sigma = sigma;
  s.p = p;
  s.m = m;
  const auto conv = detail::robin_convection(c, CurrentFlux::max_slope, omega.width(), D);
  return detail::run_fv<detail::Identity, CurrentFlux>(omega.values(), s, D, c, conv, false, 0, 0, opt);
}

/// d_t rho = sigma d_u^2 a(rho) - p d_u h(rho), zero total flux at the walls.
inline GridSolution solve_convection_diffusion_robin(const Profile& rho, double sigma, double p,
                                                     const SolveOptions& opt) {
  detail::require_positive(sigma, "sigma");
  if (!(p >= 0.0)) throw DomainError("p must be nonnegative");
  for (double r : rho.values())
    if (!(r > 0.5)) throw DomainError("convection-diffusion requires rho in (1/2, 1]");
  GridSolution s;
  s.equation = Equation::convection_diffusion_robin;
  s.boundary = Boundary::robin;
  s.sigma = sigma;
  s.p = p;
  const auto conv = detail::robin_convection(p, FepFlux::max_slope, rho.width(), sigma);
  return detail::run_fv<detail::FastDiffusion, FepFlux>(rho.values(), s, sigma, p, conv, false, 0, 0, opt);
}

struct EntropyMethod {
  Method method = Method::godunov;
  double epsilon = 0.0;  ///< viscosity method only

  static EntropyMethod godunov() { return {Method::godunov, 0.0}; }
  static EntropyMethod viscosity(double eps) { return {Method::viscosity, eps}; }
};

/// d_t w + (p/m) d_v J(w) = 0 with w(0) = 0, w(1) = 1, or its parabolic
/// perturbation with (epsilon/m^2) d_v^2 w.
inline GridSolution solve_burgers_entropy(const Profile& omega, double p, double m, const SolveOptions& opt,
                                          EntropyMethod method = EntropyMethod::godunov()) {
  detail::require_positive(m, "m");
  if (!(p >= 0.0)) throw DomainError("p must be nonnegative");
  if (method.method == Method::viscosity) detail::require_positive(method.epsilon, "epsilon");
  GridSolution s;
  s.equation = Equation::burgers_dirichlet;
  s.boundary = Boundary::dirichlet_entropy;
  s.method = method.method;
  s.p = p;
  s.m = m;
  s.epsilon = method.method == Method::viscosity ? method.epsilon : 0.0;
  return detail::run_fv<detail::Identity, CurrentFlux>(omega.values(), s, s.epsilon / (m * m), p / m,
                                                      detail::Convective::godunov, true, 0.0, 1.0, opt);
}

/// d_t rho + p d_u h(rho) = 0 with rho(0) = 1/2, rho(1) = 1, or its parabolic
/// perturbation with epsilon d_u^2 a(rho).
inline GridSolution solve_conservation_law_entropy(const Profile& rho, double p, const SolveOptions& opt,
                                                   EntropyMethod method = EntropyMethod::godunov()) {
  if (!(p >= 0.0)) throw DomainError("p must be nonnegative");
  if (method.method == Method::viscosity) detail::require_positive(method.epsilon, "epsilon");
  GridSolution s;
  s.equation = Equation::conservation_law_dirichlet;
  s.boundary = Boundary::dirichlet_entropy;
  s.method = method.method;
  s.p = p;
  s.epsilon = method.method == Method::viscosity ? method.epsilon : 0.0;
  return detail::run_fv<detail::FastDiffusion, FepFlux>(rho.values(), s, s.epsilon, p, detail::Convective::godunov,
                                                        true, 0.5, 1.0, opt);
}

// ---------------------------------------------------------------------------
// Norms on cell data

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InconsistentShape("grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InconsistentShape("grids differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// Cell averages of a fine grid on a coarser one (K_fine a multiple of K).
inline std::vector<double> coarsen(const std::vector<double>& fine, std::size_t K) {
  std::vector<double> breaks(fine.size() + 1);
  for (std::size_t i = 0; i <= fine.size(); ++i) breaks[i] = static_cast<double>(i) / static_cast<double>(fine.size());
  return remap_cell_averages(breaks, fine, K);
}

}  // namespace fep
