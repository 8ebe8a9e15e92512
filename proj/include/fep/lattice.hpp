#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fep/error.hpp"

namespace fep {

/// Occupation variables on the bulk {1, ..., size-1}, packed 64 sites per word.
///
/// The tag keeps facilitated (FEP) and simple (SEP) states apart at compile
/// time; both share the storage and text form ('0'/'1', site 1 first).
template <class Tag>
class Occupations {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Occupations() = default;

  /// All-empty state on a lattice of scale `size` (size-1 sites).
  explicit Occupations(std::size_t size) : size_(size), words_(word_count(size), 0) {
    if (size == 0) throw InconsistentShape("lattice scale must be positive");
  }

  /// `values[i]` is the occupation of site i+1; values.size() must be size-1.
  Occupations(std::size_t size, std::span<const std::uint8_t> values) : Occupations(size) {
    if (values.size() != sites()) {
      throw InconsistentShape("expected " + std::to_string(sites()) + " occupations, got " +
                              std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] > 1) throw DomainError("occupation values must be 0 or 1");
      if (values[i]) words_[i / kWordBits] |= word_type{1} << (i % kWordBits);
    }
  }

  static Occupations filled(std::size_t size) {
    Occupations o(size);
    for (std::size_t i = 0; i < o.sites(); ++i) o.words_[i / kWordBits] |= word_type{1} << (i % kWordBits);
    return o;
  }

  /// Parses the text form; the lattice scale is the string length plus one.
  static Occupations parse(std::string_view text) {
    std::vector<std::uint8_t> values;
    values.reserve(text.size());
    for (char c : text) {
      if (c != '0' && c != '1') throw ParseError("configuration text must contain only '0' and '1'");
      values.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return Occupations(text.size() + 1, values);
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t sites() const noexcept { return size_ == 0 ? 0 : size_ - 1; }

  /// Occupation of bulk site x, 1 <= x <= size-1.
  bool operator[](std::size_t x) const noexcept {
    const std::size_t i = x - 1;
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
  }

  bool at(std::size_t x) const {
    if (x < 1 || x >= size_) throw IndexError("site " + std::to_string(x) + " outside the bulk");
    return (*this)[x];
  }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::string str() const {
    std::string s(sites(), '0');
    for (std::size_t x = 1; x < size_; ++x)
      if ((*this)[x]) s[x - 1] = '1';
    return s;
  }

  std::vector<std::uint8_t> to_vector() const {
    std::vector<std::uint8_t> v(sites());
    for (std::size_t x = 1; x < size_; ++x) v[x - 1] = (*this)[x];
    return v;
  }

  /// The state with occupations of x and x+1 exchanged.
  Occupations swapped(std::size_t x) const {
    if (x < 1 || x + 1 >= size_) throw IndexError("bond (" + std::to_string(x) + ", x+1) outside the bulk");
    Occupations o = *this;
    const bool a = (*this)[x];
    const bool b = (*this)[x + 1];
    o.assign(x, b);
    o.assign(x + 1, a);
    return o;
  }

  Occupations reflected() const {
    Occupations o(size_);
    for (std::size_t x = 1; x < size_; ++x) o.assign(size_ - x, (*this)[x]);
    return o;
  }

  std::span<const word_type> words() const noexcept { return words_; }

  friend bool operator==(const Occupations&, const Occupations&) = default;

  /// Lexicographic order of the text form.
  friend bool operator<(const Occupations& a, const Occupations& b) {
    const std::size_t n = std::min(a.sites(), b.sites());
    for (std::size_t x = 1; x <= n; ++x)
      if (a[x] != b[x]) return !a[x];
    return a.sites() < b.sites();
  }

 private:
  static std::size_t word_count(std::size_t size) {
    return size <= 1 ? 0 : (size - 1 + kWordBits - 1) / kWordBits;
  }

  void assign(std::size_t x, bool v) {
    const std::size_t i = x - 1;
    const word_type bit = word_type{1} << (i % kWordBits);
    if (v)
      words_[i / kWordBits] |= bit;
    else
      words_[i / kWordBits] &= ~bit;
  }

  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

struct FepTag {};
struct SepTag {};

/// FEP state on Lambda_N = {1, ..., N-1}; eta_0 = eta_N = 1 are implicit walls.
using Configuration = Occupations<FepTag>;
/// SEP state on Lambda_M = {1, ..., M-1}.
using SepConfiguration = Occupations<SepTag>;

/// FEP occupation with the wall convention eta_0 = eta_N = 1.
inline bool occupied_or_wall(const Configuration& c, std::size_t x) {
  return x == 0 || x >= c.size() || c[x];
}

// ---------------------------------------------------------------------------
// Parameters

enum class Regime { sfep, vwafep, wafep, afepvv };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::sfep: return "sfep";
    case Regime::vwafep: return "vwafep";
    case Regime::wafep: return "wafep";
    case Regime::afepvv: return "afepvv";
  }
  return "?";
}

inline Regime parse_regime(std::string_view s) {
  if (s == "sfep") return Regime::sfep;
  if (s == "vwafep") return Regime::vwafep;
  if (s == "wafep") return Regime::wafep;
  if (s == "afepvv") return Regime::afepvv;
  throw ParseError("unknown regime '" + std::string(s) + "'");
}

inline Regime classify_regime(double p, double kappa) {
  if (p == 0.0) return Regime::sfep;
  if (kappa > 1.0) return Regime::vwafep;
  if (kappa == 1.0) return Regime::wafep;
  return Regime::afepvv;
}

/// Regime parameters and the derived time scale Theta_N = N^{min(1+kappa, 2)}.
struct Params {
  double sigma = 1.0;
  double p = 0.0;
  double kappa = 1.0;
  std::size_t N = 2;
  long double theta = 4.0L;
  Regime regime = Regime::sfep;

  static Params make(double sigma, double p, double kappa, std::size_t N) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (!(p >= 0.0)) throw DomainError("p must be nonnegative");
    if (!(kappa >= 0.0)) throw DomainError("kappa must be nonnegative");
    if (N < 2) throw DomainError("lattice scale N must be at least 2");
    Params q;
    q.sigma = sigma;
    q.p = p;
    q.kappa = kappa;
    q.N = N;
    const long double exponent = std::min(1.0L + static_cast<long double>(kappa), 2.0L);
    q.theta = std::pow(static_cast<long double>(N), exponent);
    q.regime = classify_regime(p, kappa);
    return q;
  }

  /// Same regime at another lattice scale.
  Params at_scale(std::size_t n) const { return make(sigma, p, kappa, n); }

  /// Rate of a permitted jump to the right, (sigma + p N^{-kappa}) Theta_N.
  double right_rate() const {
    const long double drift = static_cast<long double>(p) *
                              std::pow(static_cast<long double>(N), -static_cast<long double>(kappa));
    return static_cast<double>((static_cast<long double>(sigma) + drift) * theta);
  }

  /// Rate of a permitted jump to the left, sigma Theta_N.
  double left_rate() const { return static_cast<double>(static_cast<long double>(sigma) * theta); }
};

// ---------------------------------------------------------------------------
// Ergodic component and counting

/// True iff no two neighbouring bulk sites are both empty.
template <class Tag>
bool no_adjacent_holes(const Occupations<Tag>& c) {
  using W = typename Occupations<Tag>::word_type;
  constexpr std::size_t B = Occupations<Tag>::kWordBits;
  const auto words = c.words();
  const std::size_t n = c.sites();
  bool carry_hole = false;  // site just before this word is empty
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::size_t valid = std::min(B, n - w * B);
    const W mask = valid == B ? ~W{0} : ((W{1} << valid) - 1);
    const W holes = ~words[w] & mask;
    if (holes & (holes >> 1)) return false;
    if (carry_hole && (holes & 1u)) return false;
    carry_hole = (holes >> (valid - 1)) & 1u;
  }
  return true;
}

inline bool is_ergodic(const Configuration& c) { return no_adjacent_holes(c); }

inline std::size_t particle_count(const Configuration& c) { return c.count(); }

inline constexpr std::size_t kEnumerationCap = 20;

/// All ergodic configurations of Lambda_N (optionally with exactly k particles),
/// in lexicographic order of their text form.
inline std::vector<Configuration> enumerate_ergodic(std::size_t N, std::optional<std::size_t> k = std::nullopt) {
  if (N > kEnumerationCap)
    throw EnumerationTooLarge("enumeration of the ergodic component is capped at N <= " +
                              std::to_string(kEnumerationCap));
  if (N < 1) throw DomainError("lattice scale N must be positive");
  const std::size_t n = N - 1;
  std::vector<Configuration> out;
  std::vector<std::uint8_t> buf(n);
  // Depth-first over '0' before '1' yields lexicographic order.
  auto rec = [&](auto&& self, std::size_t i, std::size_t ones) -> void {
    if (k && ones > *k) return;
    if (k && ones + (n - i) < *k) return;
    if (i == n) {
      out.emplace_back(N, buf);
      return;
    }
    if (i == 0 || buf[i - 1] == 1) {
      buf[i] = 0;
      self(self, i + 1, ones);
    }
    buf[i] = 1;
    self(self, i + 1, ones + 1);
  };
  rec(rec, 0, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Empirical measures

struct EmpiricalDensity {
  std::vector<double> values;

  std::size_t cells() const noexcept { return values.size(); }
};

/// Cell of site x on K uniform cells of [0,1]: x/N in [j/K, (j+1)/K), last cell closed.
inline std::size_t cell_of_site(std::size_t x, std::size_t N, std::size_t K) {
  return std::min((x * K) / N, K - 1);
}

/// Sites of Lambda_size per cell.
inline std::vector<std::size_t> sites_per_cell(std::size_t size, std::size_t K) {
  std::vector<std::size_t> n(K, 0);
  for (std::size_t x = 1; x < size; ++x) ++n[cell_of_site(x, size, K)];
  return n;
}

/// Particle fraction per cell, normalised by the number of sites in the cell.
template <class Tag>
EmpiricalDensity empirical_density(const Occupations<Tag>& c, std::size_t K) {
  if (K == 0) throw DomainError("cell count K must be positive");
  std::vector<double> count(K, 0.0);
  const auto sites = sites_per_cell(c.size(), K);
  for (std::size_t x = 1; x < c.size(); ++x)
    if (c[x]) count[cell_of_site(x, c.size(), K)] += 1.0;
  EmpiricalDensity d;
  d.values.resize(K, 0.0);
  for (std::size_t j = 0; j < K; ++j)
    if (sites[j] > 0) d.values[j] = count[j] / static_cast<double>(sites[j]);
  return d;
}

/// (1/N) sum_x G(x/N) eta_x.
template <class Tag, class G>
double test_function_pairing(const Occupations<Tag>& c, G&& g) {
  const double n = static_cast<double>(c.size());
  double s = 0.0;
  for (std::size_t x = 1; x < c.size(); ++x)
    if (c[x]) s += g(static_cast<double>(x) / n);
  return s / n;
}

}  // namespace fep
