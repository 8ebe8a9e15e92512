#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fep/dynamics.hpp"
#include "fep/error.hpp"
#include "fep/mapping.hpp"
#include "fep/pde.hpp"

namespace fep {

/// Full-precision decimal form used by every text output.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  return in;
}

inline double parse_number(const std::string& tok, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + tok + "' is not a number");
  }
  if (used != tok.size()) throw ParseError(where + ": '" + tok + "' is not a number");
  return v;
}

/// Whitespace-separated numeric rows; blank lines and '#' comments are skipped.
inline std::vector<std::vector<double>> read_rows(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) row.push_back(parse_number(tok, name + ":" + std::to_string(lineno)));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Profiles: two columns, cell centre and value.

inline void write_profile(std::ostream& out, const Profile& p) {
  for (std::size_t j = 0; j < p.cells(); ++j) out << format_number(p.center(j)) << ' ' << format_number(p[j]) << '\n';
}

inline void write_profile(const std::string& path, const Profile& p) {
  auto out = detail::open_out(path);
  write_profile(out, p);
}

inline Profile read_profile(std::istream& in, ProfileRange range, const std::string& name = "profile") {
  const auto rows = detail::read_rows(in, name);
  if (rows.empty()) throw ParseError(name + ": no data");
  std::vector<double> values;
  const double h = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != 2) throw ParseError(name + ": expected two columns (u, value)");
    if (std::abs(rows[j][0] - (static_cast<double>(j) + 0.5) * h) > 1e-9)
      throw ParseError(name + ": first column must hold the uniform cell centres");
    values.push_back(rows[j][1]);
  }
  try {
    return Profile(std::move(values), range);
  } catch (const DomainError& e) {
    throw ParseError(name + ": " + e.what());
  }
}

inline Profile read_profile(const std::string& path, ProfileRange range) {
  auto in = detail::open_in(path);
  return read_profile(in, range, path);
}

// ---------------------------------------------------------------------------
// Mass maps: u, v(u) and the cumulative mass m v(u) at the breakpoints.

inline void write_mass_map(std::ostream& out, const MassMap& map) {
  out << "# u v mass m=" << format_number(map.mass()) << '\n';
  for (std::size_t i = 0; i < map.u_nodes().size(); ++i)
    out << format_number(map.u_nodes()[i]) << ' ' << format_number(map.v_nodes()[i]) << ' '
        << format_number(map.mass() * map.v_nodes()[i]) << '\n';
}

inline void write_mass_map(const std::string& path, const MassMap& map) {
  auto out = detail::open_out(path);
  write_mass_map(out, map);
}

// ---------------------------------------------------------------------------
// Grid solutions: one JSON header line, then "t x_1 ... x_K" per row.

inline nlohmann::json solution_header(const GridSolution& s) {
  return {{"equation", to_string(s.equation)}, {"boundary", to_string(s.boundary)},
          {"method", to_string(s.method)},     {"sigma", s.sigma},
          {"p", s.p},                          {"m", s.m},
          {"epsilon", s.epsilon},              {"dt", s.dt},
          {"steps", s.steps},                  {"cells", s.cells()}};
}

inline void write_solution(std::ostream& out, const GridSolution& s) {
  out << "# " << solution_header(s).dump() << '\n';
  for (std::size_t n = 0; n < s.times.size(); ++n) {
    out << format_number(s.times[n]);
    for (double v : s.values[n]) out << ' ' << format_number(v);
    out << '\n';
  }
}

inline void write_solution(const std::string& path, const GridSolution& s) {
  auto out = detail::open_out(path);
  write_solution(out, s);
}

inline GridSolution read_solution(std::istream& in, const std::string& name = "solution") {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) throw ParseError(name + ": missing header line");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(name + ": bad header: " + e.what());
  }
  GridSolution s;
  try {
    s.equation = parse_equation(h.at("equation").get<std::string>());
    s.boundary = boundary_of(s.equation);
    const auto method = h.at("method").get<std::string>();
    s.method = method == "godunov" ? Method::godunov : method == "viscosity" ? Method::viscosity : Method::explicit_fv;
    s.sigma = h.at("sigma").get<double>();
    s.p = h.at("p").get<double>();
    s.m = h.at("m").get<double>();
    s.epsilon = h.at("epsilon").get<double>();
    s.dt = h.at("dt").get<double>();
    s.steps = h.at("steps").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(name + ": bad header: " + e.what());
  }
  const std::size_t K = h.value("cells", std::size_t{0});
  for (auto& row : detail::read_rows(in, name)) {
    if (row.size() != K + 1) throw ParseError(name + ": row width differs from the declared cell count");
    s.times.push_back(row.front());
    s.values.emplace_back(row.begin() + 1, row.end());
  }
  return s;
}

inline GridSolution read_solution(const std::string& path) {
  auto in = detail::open_in(path);
  return read_solution(in, path);
}

// ---------------------------------------------------------------------------
// Trajectory snapshots: "t occupations" with occupations as a 0/1 string.

template <class State>
void write_snapshots(std::ostream& out, const Trajectory<State>& tr) {
  out << "# seed=" << tr.seed << " stream=" << tr.stream << " events=" << tr.event_count
      << " absorbed=" << (tr.absorbed ? 1 : 0) << '\n';
  out << format_number(0.0) << ' ' << tr.initial.str() << '\n';
  for (std::size_t i = 0; i < tr.times.size(); ++i) out << format_number(tr.times[i]) << ' ' << tr.snapshots[i].str() << '\n';
}

template <class State>
void write_snapshots(const std::string& path, const Trajectory<State>& tr) {
  auto out = detail::open_out(path);
  write_snapshots(out, tr);
}

/// Inverse of write_snapshots: (time, configuration) pairs including t = 0.
template <class State>
std::vector<std::pair<double, State>> read_snapshots(std::istream& in, const std::string& name = "snapshots") {
  std::vector<std::pair<double, State>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string t, occ;
    if (!(ss >> t >> occ)) throw ParseError(name + ": expected 'time occupations'");
    out.emplace_back(detail::parse_number(t, name), State::parse(occ));
  }
  return out;
}

}  // namespace fep
