#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fep/error.hpp"
#include "fep/pde.hpp"
#include "fep/rng.hpp"

namespace fep {

// ---------------------------------------------------------------------------
// Flux selection for entropy pairs

enum class FluxKind {
  current,  ///< J(w) = w(1-w) on [0,1]
  fep,      ///< h(r) = (1-r)(2r-1)/r on [1/2,1]
};

inline double flux_lower(FluxKind k) { return k == FluxKind::fep ? 0.5 : 0.0; }
inline double flux_value(FluxKind k, double r) { return k == FluxKind::fep ? FepFlux::f(r) : CurrentFlux::f(r); }
inline double flux_slope(FluxKind k, double r) { return k == FluxKind::fep ? FepFlux::df(r) : CurrentFlux::df(r); }

inline FluxKind flux_of(Equation e) { return fep_side(e) ? FluxKind::fep : FluxKind::current; }

/// Coefficient c of the convective term c d f(x) of an equation.
inline double convective_coefficient(const GridSolution& s) {
  return fep_side(s.equation) ? s.p : s.p / s.m;
}

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double a, double b, int pieces = 1) {
  double s = 0.0;
  const double w = (b - a) / pieces;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + k * w, mid = lo + 0.5 * w;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) s += kGaussWeights[i] * f(mid + 0.5 * w * kGaussNodes[i]);
  }
  return 0.5 * w * s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lax entropy-flux pairs

/// Convex entropy F with flux Q, Q' = f' F', normalised by Q(lower end) = 0.
/// Q is tabulated on a fine grid and interpolated by cubic Hermite splines
/// using the exact derivative at the nodes.
class EntropyPair {
 public:
  using Fn = std::function<double(double)>;

  EntropyPair(std::string name, FluxKind flux, Fn F, Fn dF, Fn d2F, std::size_t nodes = 1 << 17)
      : name_(std::move(name)), flux_(flux), F_(std::move(F)), dF_(std::move(dF)), d2F_(std::move(d2F)) {
    const double lo = flux_lower(flux_);
    step_ = (1.0 - lo) / static_cast<double>(nodes);
    q_.resize(nodes + 1);
    dq_.resize(nodes + 1);
    auto integrand = [&](double s) { return flux_slope(flux_, s) * dF_(s); };
    q_[0] = 0.0;
    for (std::size_t i = 0; i <= nodes; ++i) {
      const double r = lo + static_cast<double>(i) * step_;
      dq_[i] = integrand(r);
      if (i > 0) q_[i] = q_[i - 1] + detail::gauss_legendre(integrand, r - step_, r);
    }
  }

  const std::string& name() const { return name_; }
  FluxKind flux() const { return flux_; }
  double F(double r) const { return F_(r); }
  double dF(double r) const { return dF_(r); }
  double d2F(double r) const { return d2F_(r); }

  double Q(double r) const {
    const double lo = flux_lower(flux_);
    const double x = std::clamp((r - lo) / step_, 0.0, static_cast<double>(q_.size() - 1));
    auto i = static_cast<std::size_t>(x);
    if (i + 1 >= q_.size()) i = q_.size() - 2;
    const double t = x - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * q_[i] + (t3 - 2 * t2 + t) * step_ * dq_[i] + (-2 * t3 + 3 * t2) * q_[i + 1] +
           (t3 - t2) * step_ * dq_[i + 1];
  }

 private:
  std::string name_;
  FluxKind flux_;
  Fn F_, dF_, d2F_;
  double step_ = 0.0;
  std::vector<double> q_, dq_;
};

inline EntropyPair quadratic_pair(FluxKind flux, double q) {
  return EntropyPair(
      "quadratic(q=" + format_double(q) + ")", flux, [q](double r) { return 0.5 * (r - q) * (r - q); },
      [q](double r) { return r - q; }, [](double) { return 1.0; });
}

inline constexpr double kKruzhkovMollifier = 1e-3;

/// sqrt((r-q)^2 + delta^2): |r - q| mollified at scale delta.
inline EntropyPair kruzhkov_pair(FluxKind flux, double q, double delta = kKruzhkovMollifier) {
  return EntropyPair(
      "kruzhkov(q=" + format_double(q) + ")", flux, [q, delta](double r) { return std::hypot(r - q, delta); },
      [q, delta](double r) { return (r - q) / std::hypot(r - q, delta); },
      [q, delta](double r) {
        const double s = std::hypot(r - q, delta);
        return delta * delta / (s * s * s);
      });
}

/// C^2 convex ramp: 0 for s <= 0, s - 1/2 for s >= 1, and on [0,1] the
/// integral of the smoothstep 10s^3 - 15s^4 + 6s^5.
struct Ramp {
  static double value(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return s - 0.5;
    const double s4 = s * s * s * s;
    return s4 * (2.5 - 3.0 * s + s * s);
  }
  static double slope(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  }
  static double curvature(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 30.0 * s * s * (1.0 - s) * (1.0 - s);
  }
};

/// F_{gamma,q}(r) = F(gamma (r - q)) / gamma with the ramp F.
inline EntropyPair ramp_pair(FluxKind flux, double gamma, double q) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return EntropyPair(
      "ramp(gamma=" + format_double(gamma) + ",q=" + format_double(q) + ")", flux,
      [gamma, q](double r) { return Ramp::value(gamma * (r - q)) / gamma; },
      [gamma, q](double r) { return Ramp::slope(gamma * (r - q)); },
      [gamma, q](double r) { return gamma * Ramp::curvature(gamma * (r - q)); });
}

/// The fixed battery of pairs used by the entropy checks.
inline std::vector<EntropyPair> builtin_pairs(FluxKind flux) {
  std::vector<EntropyPair> out;
  if (flux == FluxKind::current) {
    out.push_back(quadratic_pair(flux, 0.5));
    for (double q : {0.2, 0.5, 0.8}) out.push_back(kruzhkov_pair(flux, q));
    out.push_back(ramp_pair(flux, 10.0, 0.3));
    out.push_back(ramp_pair(flux, 10.0, 0.6));
  } else {
    out.push_back(quadratic_pair(flux, 0.75));
    for (double q : {0.6, 0.75, 0.9}) out.push_back(kruzhkov_pair(flux, q));
    out.push_back(ramp_pair(flux, 20.0, 0.6));
    out.push_back(ramp_pair(flux, 20.0, 0.8));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary entropy-flux pairs

/// (F_gamma(r,q), Q_gamma(r,q)) from the ramp; as gamma grows they tend to
/// (r-q) 1_{r>=q} and (f(r)-f(q)) 1_{r>=q}.
class BoundaryEntropyPair {
 public:
  BoundaryEntropyPair(double gamma, FluxKind flux) : gamma_(gamma), flux_(flux) {
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  }

  double gamma() const { return gamma_; }
  FluxKind flux() const { return flux_; }

  double F(double r, double q) const { return Ramp::value(gamma_ * (r - q)) / gamma_; }
  double dF(double r, double q) const { return Ramp::slope(gamma_ * (r - q)); }
  double d2F(double r, double q) const { return gamma_ * Ramp::curvature(gamma_ * (r - q)); }

  /// Q(r,q) = int_q^r f'(s) F'(gamma (s - q)) ds.
  double Q(double r, double q) const {
    if (r <= q) return 0.0;
    const double knee = q + 1.0 / gamma_;
    const double upper = std::min(r, knee);
    const double ramp = detail::gauss_legendre(
        [&](double s) { return flux_slope(flux_, s) * Ramp::slope(gamma_ * (s - q)); }, q, upper, 4);
    return r > knee ? ramp + flux_value(flux_, r) - flux_value(flux_, knee) : ramp;
  }

 private:
  double gamma_;
  FluxKind flux_;
};

inline BoundaryEntropyPair make_boundary_pair(double gamma, FluxKind flux) { return {gamma, flux}; }

// ---------------------------------------------------------------------------
// Test functions

/// Smooth bump on (a, b) with peak 1: exp(1 - 1/(1 - s^2)).
struct Bump {
  double a = 0.0, b = 1.0;

  double s(double x) const { return (2.0 * x - a - b) / (b - a); }
  double value(double x) const {
    const double z = s(x);
    if (std::abs(z) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - z * z));
  }
  double slope(double x) const {
    const double z = s(x);
    if (std::abs(z) >= 1.0) return 0.0;
    const double d = 1.0 - z * z;
    return value(x) * (-2.0 * z / (d * d)) * (2.0 / (b - a));
  }
};

/// phi(t,u) = bump_t(t) bump_u(u).
struct TestFunction {
  Bump time, space;

  double value(double t, double u) const { return time.value(t) * space.value(u); }
  double dt(double t, double u) const { return time.slope(t) * space.value(u); }
  double du(double t, double u) const { return time.value(t) * space.slope(u); }
};

/// Random product bump with support inside (0.05 T, 0.95 T) x (0.05, 0.95).
inline TestFunction random_test_function(RandomStream& rng, double T) {
  auto interval = [&](double lo, double hi, double min_width) {
    const double w = min_width + (hi - lo - min_width) * rng.uniform();
    const double a = lo + (hi - lo - w) * rng.uniform();
    return Bump{a, a + w};
  };
  return {interval(0.05 * T, 0.95 * T, 0.2 * T), interval(0.05, 0.95, 0.1)};
}

// ---------------------------------------------------------------------------
// Entropy residual

namespace detail {
inline std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t n = 0; n + 1 < t.size(); ++n) {
    const double d = 0.5 * (t[n + 1] - t[n]);
    w[n] += d;
    w[n + 1] += d;
  }
  return w;
}
}  // namespace detail

/// int int [F(x) phi_t + c Q(x) phi_u] du dt, trapezoid in time over the
/// recorded rows and midpoint in space. Entropy solutions give values >= 0
/// up to quadrature error.
inline double entropy_residual(const GridSolution& sol, const EntropyPair& pair, const TestFunction& phi) {
  if (pair.flux() != flux_of(sol.equation)) throw DomainError("entropy pair flux does not match the equation");
  const double T = sol.times.back();
  if (!(phi.time.a > 0.0 && phi.time.b < T && phi.space.a > 0.0 && phi.space.b < 1.0))
    throw DomainError("test function must have compact support inside (0,T) x (0,1)");
  const double c = convective_coefficient(sol);
  const double h = sol.width();
  const auto w = detail::trapezoid_weights(sol.times);
  double total = 0.0;
  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    const double t = sol.times[n];
    if (w[n] == 0.0 || t <= phi.time.a || t >= phi.time.b) continue;
    double row = 0.0;
    for (std::size_t i = 0; i < sol.cells(); ++i) {
      const double u = (static_cast<double>(i) + 0.5) * h;
      if (u <= phi.space.a || u >= phi.space.b) continue;
      const double x = sol.values[n][i];
      row += pair.F(x) * phi.dt(t, u) + c * pair.Q(x) * phi.du(t, u);
    }
    total += w[n] * row * h;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Boundary traces and Otto conditions

enum class Wall { left, right };

inline constexpr double kTraceWindowCells = 4.0;
inline constexpr double kDichotomyTolerance = 0.05;

struct OttoReport {
  Wall wall = Wall::left;
  double boundary_value = 0.0;
  std::vector<double> times;
  std::vector<double> traces;
  std::vector<double> gammas;
  std::vector<double> integrals;  ///< int phi(t) Q_gamma(trace(t), boundary value) dt
  double max_dichotomy_gap = 0.0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Numerical trace: mean of the cells whose centres lie within 4 cell widths of the wall.
inline double boundary_trace(const std::vector<double>& row, Wall wall) {
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(kTraceWindowCells), row.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += wall == Wall::left ? row[i] : row[row.size() - 1 - i];
  return s / static_cast<double>(n);
}

/// Evaluates the boundary inequalities (left integrals <= 0, right >= 0) for
/// each gamma, and the trace dichotomy ({0,1} for w, {1/2,1} for rho) at every
/// recorded time in [t_lo, t_hi].
inline OttoReport check_otto_boundary(const GridSolution& sol, Wall wall, double boundary_value,
                                      const std::function<double(double)>& phi, const std::vector<double>& gammas,
                                      double t_lo, double t_hi, double tol = 1e-9) {
  OttoReport rep;
  rep.wall = wall;
  rep.boundary_value = boundary_value;
  rep.gammas = gammas;
  const FluxKind flux = flux_of(sol.equation);
  const double low = flux_lower(flux);
  std::vector<double> all_traces(sol.times.size());
  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    all_traces[n] = boundary_trace(sol.values[n], wall);
    if (sol.times[n] < t_lo || sol.times[n] > t_hi) continue;
    rep.times.push_back(sol.times[n]);
    rep.traces.push_back(all_traces[n]);
    const double gap = std::min(std::abs(all_traces[n] - low), std::abs(all_traces[n] - 1.0));
    rep.max_dichotomy_gap = std::max(rep.max_dichotomy_gap, gap);
    if (gap > kDichotomyTolerance)
      rep.violations.push_back("trace " + format_double(all_traces[n]) + " at t=" + format_double(sol.times[n]) +
                               " is not near either admissible boundary state");
  }
  const auto w = detail::trapezoid_weights(sol.times);
  for (double g : gammas) {
    const BoundaryEntropyPair pair(g, flux);
    double integral = 0.0;
    for (std::size_t n = 0; n < sol.times.size(); ++n)
      integral += w[n] * phi(sol.times[n]) * pair.Q(all_traces[n], boundary_value);
    rep.integrals.push_back(integral);
    const bool good = wall == Wall::left ? integral <= tol : integral >= -tol;
    if (!good)
      rep.violations.push_back("boundary integral " + format_double(integral) + " has the wrong sign for gamma=" +
                               format_double(g));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Weak residual for Neumann / Robin problems

/// Test function G(t,u) of class C^{1,2} given through G and d_u G.
struct WeakTestFunction {
  std::function<double(double, double)> value;
  std::function<double(double, double)> du;
};

struct WeakResidual {
  double value = 0.0;
  double h = 0.0;
  double dt = 0.0;        ///< largest spacing between recorded rows
  double constant = 0.0;  ///< |value| / (h + dt)
};

/// Left minus right side of the weak formulation up to time t:
///
///   <x_t,G_t> - <x_0,G_0> - int <x, d_t G> ds
///     = D int sum A(x) d_u^2 G + c int sum f(x) d_u G - D int [A(x(1)) G_u(1) - A(x(0)) G_u(0)]
///
/// with x = rho (A = a, f = h, D = sigma, c = p) or x = w (A = id, f = J,
/// D = sigma/m^2, c = p/m). Spatial quadrature follows the flux form: the
/// second-derivative term is summed cell by cell as A(x_i) [G_u]_{faces}, so
/// that the wall contributions cancel the boundary term exactly.
inline WeakResidual weak_residual(const GridSolution& sol, const WeakTestFunction& G, double t) {
  if (sol.boundary != Boundary::neumann && sol.boundary != Boundary::robin)
    throw DomainError("weak residual applies to Neumann or Robin solutions only");
  const std::size_t last = sol.row_at(t);
  const bool rho_side = fep_side(sol.equation);
  const double D = rho_side ? sol.sigma : sol.sigma / (sol.m * sol.m);
  const double c = convective_coefficient(sol);
  const std::size_t K = sol.cells();
  const double h = sol.width();
  auto A = [&](double x) { return rho_side ? detail::FastDiffusion::A(x) : x; };
  auto f = [&](double x) { return rho_side ? FepFlux::f(x) : CurrentFlux::f(x); };
  auto pairing = [&](std::size_t n, double time) {
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) s += sol.values[n][i] * G.value(time, (static_cast<double>(i) + 0.5) * h);
    return s * h;
  };
  auto rhs = [&](std::size_t n) {
    const auto& x = sol.values[n];
    const double time = sol.times[n];
    double diff = 0.0, conv = 0.0;
    for (std::size_t i = 0; i + 1 < K; ++i)
      diff += (A(x[i]) - A(x[i + 1])) * G.du(time, static_cast<double>(i + 1) * h);
    for (std::size_t i = 0; i < K; ++i)
      conv += f(x[i]) * (G.value(time, static_cast<double>(i + 1) * h) - G.value(time, static_cast<double>(i) * h));
    return D * diff + c * conv;
  };

  double lhs = pairing(last, sol.times[last]) - pairing(0, 0.0);
  double right = 0.0, max_dt = 0.0;
  double r_prev = rhs(0);
  for (std::size_t n = 0; n < last; ++n) {
    const double t0 = sol.times[n], t1 = sol.times[n + 1];
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const double u = (static_cast<double>(i) + 0.5) * h;
      s += sol.values[n][i] * (G.value(t1, u) - G.value(t0, u));
    }
    lhs -= s * h;
    const double r_next = rhs(n + 1);
    right += 0.5 * (t1 - t0) * (r_prev + r_next);
    r_prev = r_next;
    max_dt = std::max(max_dt, t1 - t0);
  }
  WeakResidual out;
  out.value = lhs - right;
  out.h = h;
  out.dt = max_dt;
  out.constant = std::abs(out.value) / (h + max_dt);
  return out;
}

}  // namespace fep
