#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "fep/dynamics.hpp"
#include "fep/io.hpp"
#include "fep/lattice.hpp"
#include "fep/mapping.hpp"
#include "fep/parallel.hpp"
#include "fep/pde.hpp"
#include "fep/rng.hpp"

namespace fep {

// ---------------------------------------------------------------------------
// Profile specifications

/// A density profile given by a closed-form tag or a two-column file:
/// const:v, linear:a,b, step:a,b,u0 (a left of u0), cosine:c,a (c + a cos(pi u)).
class ProfileSpec {
 public:
  ProfileSpec() : text_("const:1"), fn_([](double) { return 1.0; }), extremes_{1.0} {}

  static ProfileSpec parse(const std::string& text, ProfileRange range = ProfileRange::fep) {
    ProfileSpec s;
    s.text_ = text;
    s.range_ = range;
    const auto colon = text.find(':');
    const std::string tag = colon == std::string::npos ? "" : text.substr(0, colon);
    auto args = [&](std::size_t n) {
      std::vector<double> v;
      std::string rest = text.substr(colon + 1);
      std::size_t start = 0;
      while (start <= rest.size()) {
        const auto comma = rest.find(',', start);
        const auto tok = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        v.push_back(detail::parse_number(tok, "profile '" + text + "'"));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (v.size() != n)
        throw ParseError("profile '" + text + "' expects " + std::to_string(n) + " comma-separated numbers");
      return v;
    };
    if (tag == "const") {
      const double c = args(1)[0];
      s.fn_ = [c](double) { return c; };
      s.extremes_ = {c};
    } else if (tag == "linear") {
      const auto v = args(2);
      s.fn_ = [a = v[0], b = v[1]](double u) { return a + (b - a) * u; };
      s.extremes_ = {v[0], v[1]};
    } else if (tag == "step") {
      const auto v = args(3);
      if (!(v[2] >= 0.0 && v[2] <= 1.0)) throw ParseError("profile '" + text + "': step position outside [0,1]");
      s.fn_ = [a = v[0], b = v[1], u0 = v[2]](double u) { return u < u0 ? a : b; };
      s.extremes_ = {v[0], v[1]};
    } else if (tag == "cosine") {
      const auto v = args(2);
      s.fn_ = [c = v[0], a = v[1]](double u) { return c + a * std::cos(std::numbers::pi * u); };
      s.extremes_ = {v[0] - v[1], v[0] + v[1]};
    } else {
      const std::string path = tag == "file" ? text.substr(colon + 1) : text;
      auto p = std::make_shared<Profile>(read_profile(path, range));
      s.fn_ = [p](double u) { return p->at(u); };
      s.extremes_ = p->values();
      s.file_ = p;
    }
    const double lo = range_lower(range);
    for (double e : s.extremes_)
      if (!(e >= lo && e <= 1.0))
        throw DomainError("profile '" + text + "' takes value " + format_double(e) + " outside [" +
                          format_double(lo) + ", 1]");
    return s;
  }

  const std::string& text() const { return text_; }
  double operator()(double u) const { return fn_(u); }
  double min() const { return *std::min_element(extremes_.begin(), extremes_.end()); }

  /// Values on K cells: cell-centre samples, or exact cell averages for file input.
  Profile cells(std::size_t K) const {
    if (file_) {
      std::vector<double> breaks(file_->cells() + 1);
      for (std::size_t i = 0; i < breaks.size(); ++i)
        breaks[i] = static_cast<double>(i) / static_cast<double>(file_->cells());
      return Profile::clamped(remap_cell_averages(breaks, file_->values(), K), range_, 1e-12);
    }
    return Profile::sample(K, fn_, range_);
  }

 private:
  std::string text_;
  ProfileRange range_ = ProfileRange::fep;
  std::function<double(double)> fn_;
  std::vector<double> extremes_;
  std::shared_ptr<Profile> file_;
};

// ---------------------------------------------------------------------------
// Initial states

/// Two-state chain scanned from site 1: after an occupied site (or the left
/// wall) the next site x is empty with probability (1 - rho)/rho at u = x/N;
/// after an empty site the next one is occupied. No two holes are adjacent
/// and the local stationary density is rho.
template <class Rho>
Configuration sample_initial(Rho&& rho, std::size_t N, RandomStream& rng) {
  if (N < 2) throw DomainError("lattice scale N must be at least 2");
  std::vector<std::uint8_t> occ(N - 1, 1);
  bool prev_occupied = true;
  for (std::size_t x = 1; x < N; ++x) {
    const double r = rho(static_cast<double>(x) / static_cast<double>(N));
    if (!(r > 0.5 && r <= 1.0)) throw DomainError("initial profile must take values in (1/2, 1], got " + format_double(r));
    if (prev_occupied && r < 1.0 && rng.uniform() < (1.0 - r) / r) {
      occ[x - 1] = 0;
      prev_occupied = false;
    } else {
      prev_occupied = true;
    }
  }
  return Configuration(N, occ);
}

inline Configuration sample_initial(const Profile& rho, std::size_t N, std::uint64_t seed, std::uint64_t stream = 0) {
  for (double v : rho.values())
    if (!(v > 0.5)) throw DomainError("initial profile must exceed 1/2, got " + format_double(v));
  RandomStream rng(seed, stream);
  return sample_initial([&](double u) { return rho.at(u); }, N, rng);
}

// ---------------------------------------------------------------------------
// Smoothing

/// Replica average of the cell-binned densities.
inline Profile smooth(const std::vector<EmpiricalDensity>& densities) {
  if (densities.empty()) throw DomainError("nothing to smooth");
  const std::size_t K = densities.front().cells();
  std::vector<double> sum(K, 0.0);
  for (const auto& d : densities) {
    if (d.cells() != K) throw InconsistentShape("densities use different cell counts");
    for (std::size_t j = 0; j < K; ++j) sum[j] += d.values[j];
  }
  for (double& v : sum) v /= static_cast<double>(densities.size());
  return Profile::clamped(std::move(sum), ProfileRange::sep, 1e-12);
}

template <class Tag>
Profile smooth(const std::vector<Occupations<Tag>>& replicas, std::size_t K) {
  std::vector<EmpiricalDensity> d;
  d.reserve(replicas.size());
  for (const auto& c : replicas) d.push_back(empirical_density(c, K));
  return smooth(d);
}

template <class Tag>
Profile smooth(const Occupations<Tag>& c, std::size_t K) {
  return smooth(std::vector<EmpiricalDensity>{empirical_density(c, K)});
}

// ---------------------------------------------------------------------------
// Test-function battery

struct NamedFunction {
  std::string name;
  std::function<double(double)> g;
};

/// Cubic polynomials, two cosines and two bumps.
inline std::vector<NamedFunction> test_battery() {
  const double pi = std::numbers::pi;
  auto bump = [](double a, double b) {
    return [a, b](double u) {
      const double z = (2.0 * u - a - b) / (b - a);
      return std::abs(z) >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - z * z));
    };
  };
  return {{"1", [](double) { return 1.0; }},
          {"u", [](double u) { return u; }},
          {"u^2", [](double u) { return u * u; }},
          {"u^3", [](double u) { return u * u * u; }},
          {"cos(pi u)", [pi](double u) { return std::cos(pi * u); }},
          {"cos(2 pi u)", [pi](double u) { return std::cos(2 * pi * u); }},
          {"bump(0.1,0.5)", bump(0.1, 0.5)},
          {"bump(0.5,0.9)", bump(0.5, 0.9)}};
}

// ---------------------------------------------------------------------------
// Experiments

struct Experiment {
  Regime regime = Regime::sfep;
  double sigma = 1.0;
  double p = 0.0;
  double kappa = 1.0;
  std::string profile = "const:0.75";
  std::vector<std::size_t> sizes = {256, 512, 1024, 2048};
  std::vector<double> times = {0.1};
  std::size_t replicas = 16;
  std::uint64_t seed = 1;
  std::size_t cells = 32;        ///< smoothing cells K
  std::size_t pde_cells = 800;   ///< reference grid, a multiple of `cells`
  double pde_dt = 0.0;           ///< 0: largest admissible step
  double exclusion = 0.0;        ///< radius around reference shocks left out of e_N
  std::size_t bootstrap = 200;
  std::size_t jobs = 1;          ///< not part of the result

  double t_end() const { return *std::max_element(times.begin(), times.end()); }
  Params params(std::size_t N) const { return Params::make(sigma, p, kappa, N); }
  ProfileSpec initial_profile() const { return ProfileSpec::parse(profile); }

  void validate() const {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (!(p >= 0.0)) throw DomainError("p must be nonnegative");
    if (regime == Regime::afepvv && !(kappa > 0.5 && kappa < 1.0))
      throw DomainError("afepvv hydrodynamics requires kappa in (1/2, 1), got " + format_double(kappa));
    if (classify_regime(p, kappa) != regime)
      throw DomainError("parameters p=" + format_double(p) + ", kappa=" + format_double(kappa) + " describe regime " +
                        std::string(to_string(classify_regime(p, kappa))) + ", not " +
                        std::string(to_string(regime)));
    if (regime == Regime::sfep && kappa < 1.0)
      throw DomainError("sfep runs on the diffusive time scale N^2 and needs kappa >= 1");
    if (sizes.empty()) throw DomainError("at least one lattice size is required");
    for (auto N : sizes)
      if (N < 4) throw DomainError("lattice sizes must be at least 4");
    if (times.empty()) throw DomainError("at least one observation time is required");
    for (double t : times)
      if (!(t > 0.0)) throw DomainError("observation times must be positive");
    if (replicas == 0) throw DomainError("replica count must be positive");
    if (cells == 0 || pde_cells == 0 || pde_cells % cells != 0)
      throw DomainError("pde_cells must be a positive multiple of cells");
    if (!(exclusion >= 0.0)) throw DomainError("exclusion radius must be nonnegative");
    if (!(initial_profile().min() > 0.5)) throw DomainError("initial profile must exceed 1/2");
  }

  nlohmann::json to_json() const {
    return {{"regime", to_string(regime)}, {"sigma", sigma},         {"p", p},
            {"kappa", kappa},              {"profile", profile},     {"sizes", sizes},
            {"times", times},              {"replicas", replicas},   {"seed", seed},
            {"cells", cells},              {"pde_cells", pde_cells}, {"pde_dt", pde_dt},
            {"exclusion", exclusion},      {"bootstrap", bootstrap}};
  }

  static Experiment from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known = {"regime",   "sigma", "p",     "kappa",     "profile",
                                                   "sizes",    "times", "replicas", "seed",   "cells",
                                                   "pde_cells", "pde_dt", "exclusion", "bootstrap"};
    if (!j.is_object()) throw ParseError("experiment must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ParseError("unknown experiment field '" + key + "'");
    Experiment e;
    try {
      e.regime = parse_regime(j.at("regime").get<std::string>());
      e.sigma = j.value("sigma", e.sigma);
      e.p = j.value("p", e.p);
      e.kappa = j.value("kappa", e.kappa);
      e.profile = j.value("profile", e.profile);
      e.sizes = j.value("sizes", e.sizes);
      e.times = j.value("times", e.times);
      e.replicas = j.value("replicas", e.replicas);
      e.seed = j.value("seed", e.seed);
      e.cells = j.value("cells", e.cells);
      e.pde_cells = j.value("pde_cells", e.pde_cells);
      e.pde_dt = j.value("pde_dt", e.pde_dt);
      e.exclusion = j.value("exclusion", e.exclusion);
      e.bootstrap = j.value("bootstrap", e.bootstrap);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(std::string("bad experiment: ") + ex.what());
    }
    e.validate();
    return e;
  }
};

/// PDE solved by the reference for a regime on either side of the map.
inline Equation reference_equation(Regime r, Side side) {
  const bool fep = side == Side::fep;
  switch (r) {
    case Regime::sfep:
    case Regime::vwafep: return fep ? Equation::fast_diffusion_neumann : Equation::heat_neumann;
    case Regime::wafep: return fep ? Equation::convection_diffusion_robin : Equation::viscous_burgers_robin;
    case Regime::afepvv: return fep ? Equation::conservation_law_dirichlet : Equation::burgers_dirichlet;
  }
  return Equation::heat_neumann;
}

/// Reference solution on exp.pde_cells cells with rows at every observation time.
inline GridSolution reference_solution(const Experiment& exp, Side side) {
  const Profile rho = exp.initial_profile().cells(exp.pde_cells);
  const SolveOptions opt{exp.t_end(), exp.pde_dt, exp.times, 0};
  if (side == Side::fep) {
    switch (exp.regime) {
      case Regime::sfep:
      case Regime::vwafep: return solve_fast_diffusion_neumann(rho, exp.sigma, opt);
      case Regime::wafep: return solve_convection_diffusion_robin(rho, exp.sigma, exp.p, opt);
      case Regime::afepvv: return solve_conservation_law_entropy(rho, exp.p, opt);
    }
  }
  const auto img = macro_forward(rho);
  const double m = img.mass_map.mass();
  switch (exp.regime) {
    case Regime::sfep:
    case Regime::vwafep: return solve_heat_neumann(img.omega, exp.sigma, m, opt);
    case Regime::wafep: return solve_viscous_burgers_robin(img.omega, exp.sigma, exp.p, m, opt);
    case Regime::afepvv: return solve_burgers_entropy(img.omega, exp.p, m, opt);
  }
  throw DomainError("unknown regime");
}

/// Positions of jumps larger than `threshold` between neighbouring cells.
inline std::vector<double> shock_locations(const std::vector<double>& fine, double threshold = 0.05) {
  std::vector<double> out;
  const double h = 1.0 / static_cast<double>(fine.size());
  for (std::size_t i = 0; i + 1 < fine.size(); ++i)
    if (std::abs(fine[i + 1] - fine[i]) > threshold) out.push_back(static_cast<double>(i + 1) * h);
  return out;
}

/// Cells of a K-grid kept after removing those within `radius` of any point.
inline std::vector<bool> kept_cells(std::size_t K, const std::vector<double>& points, double radius) {
  std::vector<bool> keep(K, true);
  if (radius <= 0.0) return keep;
  for (std::size_t j = 0; j < K; ++j) {
    const double a = static_cast<double>(j) / static_cast<double>(K), b = static_cast<double>(j + 1) / static_cast<double>(K);
    for (double s : points)
      if (b > s - radius && a < s + radius) keep[j] = false;
  }
  return keep;
}

/// (1/K) sum over kept cells of |a - b|.
inline double masked_l1(const std::vector<double>& a, const std::vector<double>& b, const std::vector<bool>& keep) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (keep[j]) s += std::abs(a[j] - b[j]);
  return s / static_cast<double>(a.size());
}

struct ConvergenceRow {
  std::size_t N = 0;
  double time = 0.0;
  double error = 0.0;      ///< e_N: L1 distance outside the excluded cells
  double error_se = 0.0;   ///< bootstrap standard error over replicas
  std::size_t excluded_cells = 0;
  std::vector<double> pairing_errors;  ///< one per battery function
  double particle_fraction = 0.0;      ///< replica mean of particles / sites
  double scale_ratio = 1.0;            ///< replica mean of M/N (mapped runs)
  double scale_ratio_max_dev = 0.0;    ///< max over replicas of |M/N - m|
  std::vector<double> density;         ///< smoothed empirical density
  std::vector<double> reference;       ///< PDE solution on the same cells
};

struct ConvergenceTable {
  Experiment experiment;
  Side side = Side::fep;
  Equation equation = Equation::fast_diffusion_neumann;
  double mass = 0.0;  ///< int rho_ini
  std::vector<std::string> test_functions;
  std::vector<ConvergenceRow> rows;

  /// e_N at one time across the ladder.
  std::vector<double> errors_at(double t) const {
    std::vector<double> e;
    for (const auto& r : rows)
      if (std::abs(r.time - t) <= 1e-12) e.push_back(r.error);
    return e;
  }
};

/// Number of strict increases in a sequence.
inline std::size_t count_inversions(const std::vector<double>& e) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < e.size(); ++i)
    if (e[i + 1] > e[i]) ++n;
  return n;
}

namespace detail {

inline constexpr std::uint64_t kSampleStream = 0;
inline constexpr std::uint64_t kFepStream = 1;
inline constexpr std::uint64_t kSepStream = 2;
inline constexpr std::uint64_t kBootstrapStream = 3;

inline std::uint64_t replica_stream(std::uint64_t kind, std::size_t N, std::size_t r) {
  return (kind << 56) | (static_cast<std::uint64_t>(N) << 24) | static_cast<std::uint64_t>(r);
}

struct ReplicaSample {
  std::vector<std::vector<double>> density;   ///< per time, K cells
  std::vector<std::vector<double>> pairings;  ///< per time, per battery function
  std::vector<double> fraction;               ///< per time
  std::vector<double> scale;                  ///< per time, M/N
};

template <class Tag>
void record(ReplicaSample& out, const Occupations<Tag>& c, std::size_t K, const std::vector<NamedFunction>& battery,
            std::size_t N) {
  out.density.push_back(empirical_density(c, K).values);
  std::vector<double> pr;
  for (const auto& g : battery) pr.push_back(test_function_pairing(c, g.g));
  out.pairings.push_back(std::move(pr));
  out.fraction.push_back(static_cast<double>(c.count()) / static_cast<double>(c.sites()));
  out.scale.push_back(static_cast<double>(c.size()) / static_cast<double>(N));
}

inline void check_mapped_mass(const Configuration& eta, const SepConfiguration& xi) {
  const std::size_t k = eta.count();
  if (xi.size() != k + 2 || xi.count() != 2 * k + 2 - eta.size())
    throw Error("mapped configuration violates M = k + 2 or ell = 2k - N + 2");
}

/// Simulates one replica and records every observation time.
inline ReplicaSample run_replica(const Experiment& exp, const ProfileSpec& rho, std::size_t N, std::size_t r,
                                 Side side, bool direct_sep, const std::vector<NamedFunction>& battery) {
  RandomStream rng(exp.seed, replica_stream(kSampleStream, N, r));
  const Configuration eta0 = sample_initial(rho, N, rng);
  const Params params = exp.params(N);
  SimulationOptions opt;
  opt.t_end = exp.t_end();
  opt.snapshot_times = exp.times;
  opt.seed = exp.seed;
  ReplicaSample out;
  if (side == Side::sep && direct_sep) {
    opt.stream = replica_stream(kSepStream, N, r);
    const auto tr = sep_simulate(phi(eta0), params, opt);
    for (const auto& xi : tr.snapshots) {
      if (xi.size() != tr.initial.size() || xi.count() != tr.initial.count())
        throw Error("SEP trajectory changed its lattice or particle number");
      record(out, xi, exp.cells, battery, N);
    }
    return out;
  }
  opt.stream = replica_stream(kFepStream, N, r);
  const auto tr = fep_simulate(eta0, params, opt);
  for (const auto& eta : tr.snapshots) {
    if (!is_ergodic(eta) || eta.count() != eta0.count()) throw Error("FEP snapshot left the ergodic component");
    if (side == Side::fep) {
      record(out, eta, exp.cells, battery, N);
    } else {
      const auto xi = phi(eta);
      check_mapped_mass(eta, xi);
      record(out, xi, exp.cells, battery, N);
    }
  }
  return out;
}

inline ConvergenceTable run_ladder(const Experiment& exp, Side side, bool direct_sep) {
  exp.validate();
  const auto rho = exp.initial_profile();
  const auto battery = test_battery();
  ConvergenceTable table;
  table.experiment = exp;
  table.side = side;
  table.equation = reference_equation(exp.regime, side);
  table.mass = rho.cells(exp.pde_cells).mass();
  for (const auto& g : battery) table.test_functions.push_back(g.name);
  const GridSolution ref = reference_solution(exp, side);
  const double h_fine = ref.width();

  for (std::size_t N : exp.sizes) {
    std::vector<ReplicaSample> samples(exp.replicas);
    parallel_for(exp.replicas, exp.jobs,
                 [&](std::size_t r) { samples[r] = run_replica(exp, rho, N, r, side, direct_sep, battery); });
    for (std::size_t ti = 0; ti < exp.times.size(); ++ti) {
      const double t = exp.times[ti];
      const auto& fine = ref.values[ref.row_at(t)];
      ConvergenceRow row;
      row.N = N;
      row.time = t;
      row.reference = coarsen(fine, exp.cells);
      const auto keep = kept_cells(exp.cells, shock_locations(fine), exp.exclusion);
      row.excluded_cells = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), false));

      const double R = static_cast<double>(exp.replicas);
      row.density.assign(exp.cells, 0.0);
      row.pairing_errors.assign(battery.size(), 0.0);
      row.scale_ratio = 0.0;
      for (const auto& s : samples) {
        for (std::size_t j = 0; j < exp.cells; ++j) row.density[j] += s.density[ti][j] / R;
        for (std::size_t g = 0; g < battery.size(); ++g) row.pairing_errors[g] += s.pairings[ti][g] / R;
        row.particle_fraction += s.fraction[ti] / R;
        row.scale_ratio += s.scale[ti] / R;
        row.scale_ratio_max_dev = std::max(row.scale_ratio_max_dev, std::abs(s.scale[ti] - table.mass));
      }
      if (side == Side::fep) row.scale_ratio_max_dev = 0.0;
      for (std::size_t g = 0; g < battery.size(); ++g) {
        double integral = 0.0;
        for (std::size_t i = 0; i < fine.size(); ++i)
          integral += battery[g].g((static_cast<double>(i) + 0.5) * h_fine) * fine[i] * h_fine;
        row.pairing_errors[g] = std::abs(row.pairing_errors[g] - integral);
      }
      row.error = masked_l1(row.density, row.reference, keep);

      if (exp.bootstrap > 1 && exp.replicas > 1) {
        RandomStream rng(exp.seed, replica_stream(kBootstrapStream, N, ti));
        double s1 = 0.0, s2 = 0.0;
        std::vector<double> mean(exp.cells);
        for (std::size_t b = 0; b < exp.bootstrap; ++b) {
          std::fill(mean.begin(), mean.end(), 0.0);
          for (std::size_t k = 0; k < exp.replicas; ++k) {
            const auto& d = samples[rng.below(exp.replicas)].density[ti];
            for (std::size_t j = 0; j < exp.cells; ++j) mean[j] += d[j] / R;
          }
          const double e = masked_l1(mean, row.reference, keep);
          s1 += e;
          s2 += e * e;
        }
        const double B = static_cast<double>(exp.bootstrap);
        row.error_se = std::sqrt(std::max(0.0, (s2 - s1 * s1 / B) / (B - 1.0)));
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace detail

/// Hydrodynamic-limit experiment on the FEP side: replica-averaged smoothed
/// densities against the regime's PDE, for every N and observation time.
inline ConvergenceTable run_convergence(const Experiment& exp) { return detail::run_ladder(exp, Side::fep, false); }

/// The same experiment on the mapped side: FEP snapshots pushed through phi
/// (or, with `direct`, SEP runs started from phi of the initial state)
/// against the SEP-side PDE with m = int rho_ini.
inline ConvergenceTable run_sep_convergence(const Experiment& exp, bool direct = false) {
  return detail::run_ladder(exp, Side::sep, direct);
}

inline nlohmann::json to_json(const ConvergenceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"N", r.N},
                    {"time", r.time},
                    {"error", r.error},
                    {"error_se", r.error_se},
                    {"excluded_cells", r.excluded_cells},
                    {"pairing_errors", r.pairing_errors},
                    {"particle_fraction", r.particle_fraction},
                    {"scale_ratio", r.scale_ratio},
                    {"scale_ratio_max_dev", r.scale_ratio_max_dev}});
  }
  return {{"experiment", t.experiment.to_json()},
          {"side", t.side == Side::fep ? "fep" : "sep"},
          {"equation", to_string(t.equation)},
          {"mass", t.mass},
          {"test_functions", t.test_functions},
          {"rows", rows}};
}

/// Plain-text error table, one line per (N, t).
inline void write_table(std::ostream& out, const ConvergenceTable& t) {
  out << "# side=" << (t.side == Side::fep ? "fep" : "sep") << " equation=" << to_string(t.equation)
      << " regime=" << to_string(t.experiment.regime) << '\n';
  out << "# N time e_N se excluded";
  for (const auto& g : t.test_functions) out << " dev[" << g << ']';
  out << '\n';
  for (const auto& r : t.rows) {
    out << r.N << ' ' << format_number(r.time) << ' ' << format_number(r.error) << ' ' << format_number(r.error_se)
        << ' ' << r.excluded_cells;
    for (double d : r.pairing_errors) out << ' ' << format_number(d);
    out << '\n';
  }
}

}  // namespace fep
