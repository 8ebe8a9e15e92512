// fepsim: command-line front end for the facilitated exclusion library.
//
//   fepsim simulate        one trajectory from a sampled initial state
//   fepsim solve           one of the six limit PDEs on a uniform grid
//   fepsim map             forward/inverse microscopic or macroscopic map
//   fepsim check-coupling  exhaustive generator conjugation check
//   fepsim converge        hydrodynamic-limit experiment from a JSON spec
//
// Exit codes: 0 success, 1 verification failure, 2 usage or domain error.

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fep/fep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kVerificationFailed = 1;
constexpr int kUsage = 2;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fep::Error("cannot read " + path.string() + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

/// Collects emitted files and writes manifest.json next to them.
class Run {
 public:
  Run(std::string command, const std::string& out_dir)
      : command_(std::move(command)), dir_(out_dir), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  void finish(const json& parameters, std::uint64_t seed, const json& summary = json::object()) const {
    json digests = json::object();
    for (const auto& f : files_) digests[f] = sha256_file(dir_ / f);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest = {{"command", command_},       {"parameters", parameters}, {"seed", seed},
                     {"version", FEP_VERSION},     {"wall_clock_seconds", elapsed},
                     {"outputs", digests},         {"summary", summary}};
    std::ofstream(dir_ / "manifest.json") << manifest.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> files_;
};

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(fep::detail::parse_number(tok, "time list"));
  return out;
}

void check_regime(const std::string& regime_text, double p, double kappa) {
  const auto regime = fep::parse_regime(regime_text);
  if (regime == fep::Regime::afepvv && !(kappa > 0.5 && kappa < 1.0))
    throw fep::DomainError("afepvv requires kappa in (1/2, 1) for its hydrodynamic limit, got kappa=" +
                           fep::format_double(kappa));
  const auto actual = fep::classify_regime(p, kappa);
  if (regime != actual)
    throw fep::DomainError("p=" + fep::format_double(p) + ", kappa=" + fep::format_double(kappa) +
                           " belong to regime " + std::string(fep::to_string(actual)) + ", not " + regime_text);
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string side = "fep", regime = "sfep", profile = "const:0.75", snapshots, out = "fepsim-out";
  double sigma = 1.0, p = 0.0, kappa = 1.0, t_end = 0.1;
  std::size_t N = 256, cells = 0;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  check_regime(a.regime, a.p, a.kappa);
  if (a.side != "fep" && a.side != "sep") throw fep::DomainError("--side must be fep or sep");
  const auto params = fep::Params::make(a.sigma, a.p, a.kappa, a.N);
  const auto rho = fep::ProfileSpec::parse(a.profile);
  fep::RandomStream rng(a.seed, 0);
  const auto eta0 = fep::sample_initial(rho, a.N, rng);
  fep::SimulationOptions opt{a.t_end, parse_times(a.snapshots), a.seed, 1, false};

  Run run("simulate", a.out);
  json summary;
  auto densities = [&](const auto& tr) {
    if (a.cells == 0) return;
    std::ofstream out(run.path("densities.txt"));
    auto row = [&](double t, const auto& c) {
      out << fep::format_number(t);
      for (double v : fep::empirical_density(c, a.cells).values) out << ' ' << fep::format_number(v);
      out << '\n';
    };
    row(0.0, tr.initial);
    for (std::size_t i = 0; i < tr.times.size(); ++i) row(tr.times[i], tr.snapshots[i]);
  };
  if (a.side == "fep") {
    const auto tr = fep::fep_simulate(eta0, params, opt);
    fep::write_snapshots(run.path("snapshots.txt").string(), tr);
    densities(tr);
    summary = {{"events", tr.event_count}, {"absorbed", tr.absorbed}, {"particles", eta0.count()}};
  } else {
    const auto tr = fep::sep_simulate(fep::phi(eta0), params, opt);
    fep::write_snapshots(run.path("snapshots.txt").string(), tr);
    densities(tr);
    summary = {{"events", tr.event_count}, {"absorbed", tr.absorbed}, {"M", tr.initial.size()},
               {"particles", tr.initial.count()}};
  }
  run.finish({{"side", a.side}, {"regime", a.regime}, {"sigma", a.sigma}, {"p", a.p}, {"kappa", a.kappa},
              {"N", a.N}, {"t_end", a.t_end}, {"snapshots", opt.snapshot_times}, {"profile", a.profile},
              {"cells", a.cells}},
             a.seed, summary);
  std::cout << "events " << summary["events"] << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string equation, profile, times, method = "godunov", out = "fepsim-out";
  double sigma = 1.0, p = 0.0, m = 1.0, t_end = 0.1, dt = 0.0, epsilon = 1e-3;
  std::size_t cells = 200, refine = 0;
};

fep::GridSolution solve_one(const SolveArgs& a, std::size_t K) {
  const auto eq = fep::parse_equation(a.equation);
  const auto range = fep::fep_side(eq) ? fep::ProfileRange::fep : fep::ProfileRange::sep;
  const auto x = fep::ProfileSpec::parse(a.profile, range).cells(K);
  const fep::SolveOptions opt{a.t_end, a.dt, parse_times(a.times), 0};
  fep::EntropyMethod method;
  if (a.method == "viscosity")
    method = fep::EntropyMethod::viscosity(a.epsilon);
  else if (a.method != "godunov")
    throw fep::DomainError("--method must be godunov or viscosity");
  switch (eq) {
    case fep::Equation::heat_neumann: return fep::solve_heat_neumann(x, a.sigma, a.m, opt);
    case fep::Equation::fast_diffusion_neumann: return fep::solve_fast_diffusion_neumann(x, a.sigma, opt);
    case fep::Equation::viscous_burgers_robin: return fep::solve_viscous_burgers_robin(x, a.sigma, a.p, a.m, opt);
    case fep::Equation::convection_diffusion_robin: return fep::solve_convection_diffusion_robin(x, a.sigma, a.p, opt);
    case fep::Equation::burgers_dirichlet: return fep::solve_burgers_entropy(x, a.p, a.m, opt, method);
    case fep::Equation::conservation_law_dirichlet: return fep::solve_conservation_law_entropy(x, a.p, opt, method);
  }
  throw fep::DomainError("unknown equation");
}

int cmd_solve(const SolveArgs& a) {
  if (a.refine == 1) throw fep::DomainError("--refine must be at least 2");
  const auto coarse = solve_one(a, a.cells);
  Run run("solve", a.out);
  fep::write_solution(run.path("solution.txt").string(), coarse);
  json summary = {{"dt", coarse.dt}, {"steps", coarse.steps}, {"mass_initial", coarse.mass(0)},
                  {"mass_final", coarse.mass(coarse.values.size() - 1)}};
  if (a.refine >= 2) {
    const auto fine = solve_one(a, a.cells * a.refine);
    fep::write_solution(run.path("solution_refined.txt").string(), fine);
    const double d = fep::l1_distance(fep::coarsen(fine.final_values(), a.cells), coarse.final_values());
    summary["refined_cells"] = a.cells * a.refine;
    summary["l1_distance"] = d;
    std::cout << "l1_distance " << fep::format_number(d) << '\n';
  }
  run.finish({{"equation", a.equation}, {"profile", a.profile}, {"cells", a.cells}, {"sigma", a.sigma},
              {"p", a.p}, {"m", a.m}, {"t_end", a.t_end}, {"dt", a.dt}, {"times", a.times},
              {"method", a.method}, {"epsilon", a.epsilon}, {"refine", a.refine}},
             0, summary);
  std::cout << "steps " << coarse.steps << " dt " << fep::format_number(coarse.dt) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct MapArgs {
  bool forward = false, inverse = false;
  std::string profile, config, out = "fepsim-out";
  std::size_t cells = 0, N = 0;
  double mass = 0.0;
};

int cmd_map(const MapArgs& a) {
  if (a.forward == a.inverse) throw fep::DomainError("choose exactly one of --forward and --inverse");
  if (a.profile.empty() == a.config.empty()) throw fep::DomainError("give exactly one of --profile and --config");
  Run run("map", a.out);
  json summary;
  if (!a.config.empty()) {
    std::string text;
    if (a.forward) {
      const auto eta = fep::Configuration::parse(a.config);
      if (!fep::is_ergodic(eta)) throw fep::DomainError("configuration is not in the ergodic component");
      text = fep::phi(eta).str();
    } else {
      if (a.N == 0) throw fep::DomainError("--inverse with --config needs --N");
      text = fep::phi_inverse(fep::SepConfiguration::parse(a.config), a.N).str();
    }
    std::ofstream(run.path("configuration.txt")) << text << '\n';
    std::cout << text << '\n';
    summary = {{"configuration", text}};
  } else if (a.forward) {
    const auto rho = fep::ProfileSpec::parse(a.profile);
    const std::size_t K = a.cells ? a.cells : 100;
    const auto img = fep::macro_forward(rho.cells(K));
    fep::write_profile(run.path("profile.txt").string(), img.omega);
    fep::write_mass_map(run.path("mass_map.txt").string(), img.mass_map);
    summary = {{"mass", img.mass_map.mass()}};
    std::cout << "mass " << fep::format_number(img.mass_map.mass()) << '\n';
  } else {
    if (!(a.mass > 0.0)) throw fep::DomainError("--inverse with --profile needs --mass");
    const auto omega = fep::ProfileSpec::parse(a.profile, fep::ProfileRange::sep);
    const std::size_t K = a.cells ? a.cells : 100;
    const auto w = omega.cells(K);
    const auto rho = fep::macro_inverse(w, a.mass);
    fep::write_profile(run.path("profile.txt").string(), rho);
    fep::write_mass_map(run.path("mass_map.txt").string(), fep::mass_map_from_omega(w, a.mass));
    summary = {{"mass", rho.mass()}};
    std::cout << "mass " << fep::format_number(rho.mass()) << '\n';
  }
  run.finish({{"direction", a.forward ? "forward" : "inverse"}, {"profile", a.profile}, {"config", a.config},
              {"cells", a.cells}, {"N", a.N}, {"mass", a.mass}},
             0, summary);
  return kOk;
}

// ---------------------------------------------------------------------------

struct CouplingArgs {
  std::size_t N = 12;
  double sigma = 1.0, p = 1.0, kappa = 1.0;
  std::string out = "fepsim-out";
};

int cmd_check_coupling(const CouplingArgs& a) {
  const auto params = fep::Params::make(a.sigma, a.p, a.kappa, std::max<std::size_t>(a.N, 2));
  Run run("check-coupling", a.out);
  json per_n = json::array();
  std::size_t transitions = 0, mismatches = 0;
  std::ofstream dump;
  for (std::size_t n = 2; n <= a.N; ++n) {
    const auto rep = fep::verify_coupling(n, params);
    transitions += rep.fep_transitions;
    per_n.push_back({{"N", n}, {"states", rep.states}, {"fep_transitions", rep.fep_transitions},
                     {"sep_transitions", rep.sep_transitions}, {"verified", rep.verified},
                     {"mismatches", rep.mismatches.size()}});
    if (!rep.ok()) {
      if (!dump.is_open()) dump.open(run.path("mismatches.txt"));
      for (const auto& m : rep.mismatches) {
        ++mismatches;
        dump << "N=" << n << " eta=" << m.fep_state << " xi=" << m.sep_state << " bond=" << m.move.bond
             << " dir=" << (m.move.dir == fep::Direction::right ? "right" : "left")
             << " fep_rate=" << fep::format_number(m.fep_rate) << " sep_rate=" << fep::format_number(m.sep_rate)
             << " reason=" << m.reason << '\n';
      }
      if (rep.mismatches.empty()) {
        ++mismatches;
        dump << "N=" << n << " transition counts differ\n";
      }
    }
  }
  if (dump.is_open()) dump.close();
  run.finish({{"N", a.N}, {"sigma", a.sigma}, {"p", a.p}, {"kappa", a.kappa}}, 0,
             {{"transitions", transitions}, {"mismatches", mismatches}, {"per_N", per_n}});
  std::cout << "transitions " << transitions << " mismatches " << mismatches << '\n';
  return mismatches == 0 ? kOk : kVerificationFailed;
}

// ---------------------------------------------------------------------------

struct ConvergeArgs {
  std::string experiment, side = "fep", out = "fepsim-out";
  bool direct = false;
  std::size_t jobs = 1;
};

int cmd_converge(const ConvergeArgs& a) {
  std::ifstream in(a.experiment);
  if (!in) throw fep::ParseError("cannot read " + a.experiment);
  json spec;
  try {
    spec = json::parse(in);
  } catch (const json::exception& e) {
    throw fep::ParseError(a.experiment + ": " + e.what());
  }
  auto exp = fep::Experiment::from_json(spec);
  exp.jobs = a.jobs;
  if (a.side != "fep" && a.side != "sep") throw fep::DomainError("--side must be fep or sep");
  const auto table = a.side == "fep" ? fep::run_convergence(exp) : fep::run_sep_convergence(exp, a.direct);

  Run run("converge", a.out);
  {
    std::ofstream out(run.path("table.txt"));
    fep::write_table(out, table);
  }
  std::ofstream(run.path("table.json")) << fep::to_json(table).dump(2) << '\n';
  {
    std::ofstream out(run.path("densities.txt"));
    out << "# N time kind values...\n";
    for (const auto& r : table.rows) {
      for (int kind = 0; kind < 2; ++kind) {
        out << r.N << ' ' << fep::format_number(r.time) << (kind == 0 ? " empirical" : " reference");
        for (double v : kind == 0 ? r.density : r.reference) out << ' ' << fep::format_number(v);
        out << '\n';
      }
    }
  }
  fep::write_table(std::cout, table);
  run.finish({{"experiment", exp.to_json()}, {"side", a.side}, {"direct", a.direct}}, exp.seed);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facilitated exclusion simulator, PDE solvers and mapping tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FEP_VERSION);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "simulate one trajectory (sep: the image of a sampled FEP state)");
  s->add_option("--side", sim.side, "fep or sep")->check(CLI::IsMember({"fep", "sep"}));
  s->add_option("--regime", sim.regime, "sfep, vwafep, wafep or afepvv");
  s->add_option("--sigma", sim.sigma);
  s->add_option("--p", sim.p);
  s->add_option("--kappa", sim.kappa);
  s->add_option("-N,--N", sim.N, "FEP lattice scale");
  s->add_option("--t-end", sim.t_end, "macroscopic end time");
  s->add_option("--snapshots", sim.snapshots, "comma-separated snapshot times");
  s->add_option("--profile", sim.profile, "const:v, linear:a,b, step:a,b,u0, cosine:c,a or a file");
  s->add_option("--cells", sim.cells, "also write binned densities on this many cells");
  s->add_option("--seed", sim.seed);
  s->add_option("--out", sim.out, "output directory");

  SolveArgs sol;
  auto* v = app.add_subcommand("solve", "solve one of the limit PDEs");
  v->add_option("--equation", sol.equation,
                "heat-neumann, fast-diffusion-neumann, viscous-burgers-robin, convection-diffusion-robin, "
                "burgers-dirichlet or conservation-law-dirichlet")
      ->required();
  v->add_option("--profile", sol.profile, "initial data")->required();
  v->add_option("--cells", sol.cells);
  v->add_option("--sigma", sol.sigma);
  v->add_option("--p", sol.p);
  v->add_option("--m", sol.m, "mass parameter of the SEP-side equations");
  v->add_option("--t-end", sol.t_end);
  v->add_option("--dt", sol.dt, "time step; 0 selects the largest admissible one");
  v->add_option("--times", sol.times, "comma-separated output times");
  v->add_option("--method", sol.method, "godunov or viscosity (Dirichlet equations)");
  v->add_option("--epsilon", sol.epsilon, "viscosity for --method viscosity");
  v->add_option("--refine", sol.refine, "also solve on cells*refine and report the L1 distance");
  v->add_option("--out", sol.out);

  MapArgs map;
  auto* m = app.add_subcommand("map", "apply phi / Phi or their inverses");
  m->add_flag("--forward", map.forward);
  m->add_flag("--inverse", map.inverse);
  m->add_option("--profile", map.profile, "profile tag or file (rho forward, omega inverse)");
  m->add_option("--config", map.config, "0/1 configuration string");
  m->add_option("--cells", map.cells, "grid for closed-form profiles (default 100)");
  m->add_option("--N", map.N, "FEP lattice scale for --inverse --config");
  m->add_option("--mass", map.mass, "m for --inverse --profile");
  m->add_option("--out", map.out);

  CouplingArgs cpl;
  auto* c = app.add_subcommand("check-coupling", "verify the generator conjugation for all lattices up to N");
  c->add_option("--N", cpl.N, "largest lattice scale (at most 14)");
  c->add_option("--sigma", cpl.sigma);
  c->add_option("--p", cpl.p);
  c->add_option("--kappa", cpl.kappa);
  c->add_option("--out", cpl.out);

  ConvergeArgs cvg;
  auto* g = app.add_subcommand("converge", "run a hydrodynamic-limit experiment");
  g->add_option("--experiment", cvg.experiment, "JSON experiment file")->required();
  g->add_option("--side", cvg.side, "fep or sep")->check(CLI::IsMember({"fep", "sep"}));
  g->add_flag("--direct", cvg.direct, "sep side: simulate SEP from the mapped initial state");
  g->add_option("--jobs", cvg.jobs, "worker threads, 0 for all cores");
  g->add_option("--out", cvg.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (v->parsed()) return cmd_solve(sol);
    if (m->parsed()) return cmd_map(map);
    if (c->parsed()) return cmd_check_coupling(cpl);
    if (g->parsed()) return cmd_converge(cvg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
