#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fep/error.hpp"
#include "fep/lattice.hpp"

namespace fep {

// ---------------------------------------------------------------------------
// Microscopic bijection between ergodic FEP and SEP configurations

/// phi: add walls at 0 and N, number the particles sitting in {0, ..., N-1},
/// and mark SEP site y occupied iff the y-th particle has an occupied right
/// neighbour. The image lives on Lambda_M with M = k+2 and 2k-N+2 particles.
inline SepConfiguration phi(const Configuration& eta) {
  if (!is_ergodic(eta)) throw DomainError("phi is defined on ergodic configurations only: " + eta.str());
  const std::size_t N = eta.size();
  const std::size_t k = eta.count();
  std::vector<std::uint8_t> xi;
  xi.reserve(k + 1);
  for (std::size_t x = 0; x < N; ++x)
    if (occupied_or_wall(eta, x)) xi.push_back(occupied_or_wall(eta, x + 1) ? 1 : 0);
  return SepConfiguration(k + 2, xi);
}

/// phi^{-1}: replace every '0' of xi by "10", then drop the leftmost site.
inline Configuration phi_inverse(const SepConfiguration& xi, std::size_t N) {
  const std::size_t M = xi.size();
  const std::size_t ell = xi.count();
  if (M < 2 || 2 * (M - 2) + 2 != N + ell)
    throw InconsistentShape("SEP state with M=" + std::to_string(M) + ", l=" + std::to_string(ell) +
                            " is not the image of any ergodic configuration with N=" + std::to_string(N));
  std::vector<std::uint8_t> expanded;
  expanded.reserve(2 * M);
  for (std::size_t y = 1; y < M; ++y) {
    expanded.push_back(1);
    if (!xi[y]) expanded.push_back(0);
  }
  return Configuration(N, std::span<const std::uint8_t>(expanded).subspan(1));
}

/// Position in Part(eta) of the particle that produced SEP site y (2 <= y <= M-1).
inline std::size_t gamma(const SepConfiguration& xi, std::size_t y) {
  if (y < 2 || y >= xi.size())
    throw IndexError("gamma is defined for 2 <= y <= M-1, got y=" + format_double(y));
  std::size_t pos = 0;
  for (std::size_t z = 1; z < y; ++z) pos += xi[z] ? 1 : 2;
  return pos;
}

/// Part(eta): positions of the particles in the bulk.
inline std::vector<std::size_t> particle_positions(const Configuration& eta) {
  std::vector<std::size_t> out;
  for (std::size_t x = 1; x < eta.size(); ++x)
    if (eta[x]) out.push_back(x);
  return out;
}

/// Empirical density of phi(eta) on K cells.
inline EmpiricalDensity empirical_push_forward(const Configuration& eta, std::size_t K) {
  return empirical_density(phi(eta), K);
}

// ---------------------------------------------------------------------------
// Density profiles

enum class ProfileRange {
  fep,  ///< values in [1/2, 1]
  sep,  ///< values in [0, 1]
};

inline double range_lower(ProfileRange r) { return r == ProfileRange::fep ? 0.5 : 0.0; }

/// Piecewise-constant density on K uniform cells of [0,1].
class Profile {
 public:
  Profile() = default;

  Profile(std::vector<double> values, ProfileRange range) : values_(std::move(values)), range_(range) {
    if (values_.empty()) throw DomainError("a profile needs at least one cell");
    const double lo = range_lower(range_);
    for (double v : values_)
      if (!(v >= lo && v <= 1.0))
        throw DomainError("profile value " + format_double(v) + " outside [" + format_double(lo) + ", 1]");
  }

  /// Values within `tol` outside the range are clamped onto it; farther values are an error.
  static Profile clamped(std::vector<double> values, ProfileRange range, double tol) {
    const double lo = range_lower(range);
    for (double& v : values) {
      if (v < lo - tol || v > 1.0 + tol)
        throw DomainError("profile value " + format_double(v) + " outside range beyond tolerance");
      v = std::clamp(v, lo, 1.0);
    }
    return Profile(std::move(values), range);
  }

  /// Cell-centre samples of f.
  template <class F>
  static Profile sample(std::size_t K, F&& f, ProfileRange range) {
    std::vector<double> v(K);
    for (std::size_t j = 0; j < K; ++j) v[j] = f((static_cast<double>(j) + 0.5) / static_cast<double>(K));
    return Profile(std::move(v), range);
  }

  std::size_t cells() const noexcept { return values_.size(); }
  double width() const noexcept { return 1.0 / static_cast<double>(values_.size()); }
  double center(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * width(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  ProfileRange range() const noexcept { return range_; }

  /// Value of the cell containing u (last cell closed).
  double at(double u) const {
    const auto j = static_cast<std::size_t>(std::clamp(u, 0.0, 1.0) * static_cast<double>(cells()));
    return values_[std::min(j, cells() - 1)];
  }

  double mass() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * width();
  }

 private:
  std::vector<double> values_;
  ProfileRange range_ = ProfileRange::sep;
};

/// Cell averages on K uniform cells of [0,1] of the piecewise-constant function
/// equal to values[i] on [breaks[i], breaks[i+1]]. breaks must increase from 0 to 1.
inline std::vector<double> remap_cell_averages(std::span<const double> breaks, std::span<const double> values,
                                               std::size_t K) {
  std::vector<double> out(K, 0.0);
  const double h = 1.0 / static_cast<double>(K);
  std::size_t i = 0;
  for (std::size_t j = 0; j < K; ++j) {
    const double a = static_cast<double>(j) * h;
    const double b = j + 1 == K ? 1.0 : static_cast<double>(j + 1) * h;
    while (i + 1 < values.size() && breaks[i + 1] <= a) ++i;
    double acc = 0.0;
    for (std::size_t s = i; s < values.size() && breaks[s] < b; ++s) {
      const double lo = std::max(a, breaks[s]);
      const double hi = std::min(b, breaks[s + 1]);
      if (hi > lo) acc += (hi - lo) * values[s];
    }
    out[j] = acc / (b - a);
  }
  return out;
}

/// Cumulative-mass change of variables between the FEP coordinate u and the
/// SEP coordinate v, stored as a monotone piecewise-linear bijection through
/// matching node pairs (u_nodes[i], v_nodes[i]).
class MassMap {
 public:
  MassMap(double mass, std::vector<double> u_nodes, std::vector<double> v_nodes)
      : mass_(mass), u_nodes_(std::move(u_nodes)), v_nodes_(std::move(v_nodes)) {}

  double mass() const noexcept { return mass_; }
  const std::vector<double>& u_nodes() const noexcept { return u_nodes_; }
  const std::vector<double>& v_nodes() const noexcept { return v_nodes_; }

  /// v_rho(u) = (1/m) int_0^u rho.
  double v_of_u(double u) const { return interpolate(u_nodes_, v_nodes_, u); }
  /// u_rho(v) = m int_0^v (2 - omega).
  double u_of_v(double v) const { return interpolate(v_nodes_, u_nodes_, v); }

  /// Samples of v_of_u at `count` + 1 uniform nodes.
  std::vector<double> tabulate_v_of_u(std::size_t count) const {
    std::vector<double> out(count + 1);
    for (std::size_t j = 0; j <= count; ++j) out[j] = v_of_u(static_cast<double>(j) / static_cast<double>(count));
    return out;
  }

 private:
  static double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
  }

  double mass_;
  std::vector<double> u_nodes_;
  std::vector<double> v_nodes_;
};

struct MacroImage {
  Profile omega;
  MassMap mass_map;
};

struct MacroOptions {
  std::size_t output_cells = 0;  ///< 0: same as the input grid
  bool relaxed = false;          ///< accept rho == 1/2 (needed for PDE solutions)
};

/// Phi: rho -> omega(v) = (2 rho(u_rho(v)) - 1) / rho(u_rho(v)).
///
/// For a piecewise-constant rho the cumulative mass is piecewise linear, so
/// the image is piecewise constant with breakpoints v_rho(u_i); the output is
/// its exact cell average on the output grid.
inline MacroImage macro_forward(const Profile& rho, MacroOptions opt = {}) {
  const std::size_t K = rho.cells();
  for (double r : rho.values()) {
    if (opt.relaxed ? r < 0.5 : r <= 0.5)
      throw DomainError("macroscopic map requires rho in " + std::string(opt.relaxed ? "[1/2, 1]" : "(1/2, 1]") +
                        ", got " + format_double(r));
  }
  const double h = rho.width();
  std::vector<double> cumulative(K + 1, 0.0);
  for (std::size_t i = 0; i < K; ++i) cumulative[i + 1] = cumulative[i] + rho[i] * h;
  const double m = cumulative[K];
  std::vector<double> u_nodes(K + 1), v_nodes(K + 1);
  for (std::size_t i = 0; i <= K; ++i) {
    u_nodes[i] = static_cast<double>(i) * h;
    v_nodes[i] = cumulative[i] / m;
  }
  u_nodes[K] = 1.0;
  v_nodes[K] = 1.0;
  std::vector<double> a(K);
  for (std::size_t i = 0; i < K; ++i) a[i] = (2.0 * rho[i] - 1.0) / rho[i];
  const std::size_t K_out = opt.output_cells ? opt.output_cells : K;
  auto omega = remap_cell_averages(v_nodes, a, K_out);
  return {Profile::clamped(std::move(omega), ProfileRange::sep, 1e-12), MassMap(m, u_nodes, v_nodes)};
}

inline constexpr double kMassConsistencyTol = 1e-6;

/// Phi^{-1}: omega, m -> rho(u) = 1 / (2 - omega(v_rho(u))).
inline Profile macro_inverse(const Profile& omega, double m, std::size_t output_cells = 0) {
  const std::size_t K = omega.cells();
  const double h = omega.width();
  std::vector<double> u_nodes(K + 1, 0.0), v_nodes(K + 1);
  for (std::size_t i = 0; i < K; ++i) u_nodes[i + 1] = u_nodes[i] + m * (2.0 - omega[i]) * h;
  const double total = u_nodes[K];
  if (!(std::abs(total - 1.0) <= kMassConsistencyTol))
    throw InconsistentMass("m * int (2 - omega) = " + format_double(total) + ", expected 1");
  for (std::size_t i = 0; i <= K; ++i) {
    u_nodes[i] /= total;
    v_nodes[i] = static_cast<double>(i) * h;
  }
  u_nodes[K] = 1.0;
  std::vector<double> r(K);
  for (std::size_t i = 0; i < K; ++i) r[i] = 1.0 / (2.0 - omega[i]);
  auto rho = remap_cell_averages(u_nodes, r, output_cells ? output_cells : K);
  return Profile::clamped(std::move(rho), ProfileRange::fep, 1e-12);
}

/// The mass map built from omega and m (inverse direction of macro_forward's).
inline MassMap mass_map_from_omega(const Profile& omega, double m) {
  const std::size_t K = omega.cells();
  const double h = omega.width();
  std::vector<double> u_nodes(K + 1, 0.0), v_nodes(K + 1);
  for (std::size_t i = 0; i < K; ++i) u_nodes[i + 1] = u_nodes[i] + m * (2.0 - omega[i]) * h;
  for (std::size_t i = 0; i <= K; ++i) v_nodes[i] = static_cast<double>(i) * h;
  return MassMap(m, u_nodes, v_nodes);
}

}  // namespace fep
