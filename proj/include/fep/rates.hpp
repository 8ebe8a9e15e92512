#pragma once

#include <cstdint>
#include <vector>

namespace fep {

enum class Direction : std::uint8_t { right = 0, left = 1 };

/// A jump across bond (x, x+1); `bond` is the left site x.
struct Move {
  std::size_t bond = 0;
  Direction dir = Direction::right;

  friend bool operator==(const Move&, const Move&) = default;
};

// Event selectors. Both keep one enabled/disabled flag per (bond, direction)
// slot, with a common rate per direction, and sample an enabled move with
// probability proportional to its rate. Bonds are 0-based slot indices here;
// the dynamics layer maps them to lattice bonds.
//
// Required interface:
//   reset(bonds, right_rate, left_rate)   all slots disabled
//   set(bond, dir, enabled)
//   enabled(bond, dir) -> bool
//   total() -> double                     exact: count * rate per direction
//   enabled_count() -> size_t
//   select(u) -> Move                     u uniform in [0, total())

/// Binary-indexed (Fenwick) trees of enabled-slot counts, one per direction.
/// Counting in integers keeps the cumulative structure exact, so there is no
/// floating-point drift to rebuild away. O(log n) update and sample.
class FenwickRates {
 public:
  void reset(std::size_t bonds, double right_rate, double left_rate) {
    bonds_ = bonds;
    rate_[0] = right_rate;
    rate_[1] = left_rate;
    for (int d = 0; d < 2; ++d) {
      tree_[d].assign(bonds + 1, 0);
      flag_[d].assign(bonds, 0);
      count_[d] = 0;
    }
    top_bit_ = 1;
    while (top_bit_ * 2 <= bonds_) top_bit_ *= 2;
  }

  void set(std::size_t bond, Direction dir, bool on) {
    const int d = static_cast<int>(dir);
    if (static_cast<bool>(flag_[d][bond]) == on) return;
    flag_[d][bond] = on;
    const std::int32_t delta = on ? 1 : -1;
    count_[d] += on ? 1 : static_cast<std::size_t>(-1);
    for (std::size_t i = bond + 1; i <= bonds_; i += i & (~i + 1)) tree_[d][i] += delta;
  }

  bool enabled(std::size_t bond, Direction dir) const { return flag_[static_cast<int>(dir)][bond]; }

  double total() const {
    return static_cast<double>(count_[0]) * rate_[0] + static_cast<double>(count_[1]) * rate_[1];
  }

  std::size_t enabled_count() const { return count_[0] + count_[1]; }
  std::size_t enabled_count(Direction dir) const { return count_[static_cast<int>(dir)]; }

  Move select(double u) const {
    const double right_mass = static_cast<double>(count_[0]) * rate_[0];
    int d = 0;
    if (u >= right_mass || count_[0] == 0) {
      d = 1;
      u -= right_mass;
    }
    auto rank = static_cast<std::size_t>(u / rate_[d]);
    if (rank >= count_[d]) rank = count_[d] - 1;
    return {kth(d, rank), static_cast<Direction>(d)};
  }

 private:
  // Slot holding the (rank+1)-th enabled flag.
  std::size_t kth(int d, std::size_t rank) const {
    std::size_t pos = 0;
    auto remaining = static_cast<std::int64_t>(rank) + 1;
    for (std::size_t step = top_bit_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= bonds_ && tree_[d][next] < remaining) {
        pos = next;
        remaining -= tree_[d][next];
      }
    }
    return pos;
  }

  std::size_t bonds_ = 0;
  std::size_t top_bit_ = 1;
  double rate_[2] = {0.0, 0.0};
  std::vector<std::int32_t> tree_[2];
  std::vector<std::uint8_t> flag_[2];
  std::size_t count_[2] = {0, 0};
};

/// Unordered lists of enabled slots per direction with O(1) insert, erase and
/// uniform pick. Exact because only two distinct nonzero rates exist.
class ClassRates {
 public:
  void reset(std::size_t bonds, double right_rate, double left_rate) {
    rate_[0] = right_rate;
    rate_[1] = left_rate;
    for (int d = 0; d < 2; ++d) {
      list_[d].clear();
      list_[d].reserve(bonds);
      pos_[d].assign(bonds, kAbsent);
    }
  }

  void set(std::size_t bond, Direction dir, bool on) {
    const int d = static_cast<int>(dir);
    auto& pos = pos_[d];
    auto& list = list_[d];
    if (on) {
      if (pos[bond] != kAbsent) return;
      pos[bond] = static_cast<std::uint32_t>(list.size());
      list.push_back(static_cast<std::uint32_t>(bond));
    } else {
      const std::uint32_t p = pos[bond];
      if (p == kAbsent) return;
      const std::uint32_t last = list.back();
      list[p] = last;
      pos[last] = p;
      list.pop_back();
      pos[bond] = kAbsent;
    }
  }

  bool enabled(std::size_t bond, Direction dir) const { return pos_[static_cast<int>(dir)][bond] != kAbsent; }

  double total() const {
    return static_cast<double>(list_[0].size()) * rate_[0] + static_cast<double>(list_[1].size()) * rate_[1];
  }

  std::size_t enabled_count() const { return list_[0].size() + list_[1].size(); }
  std::size_t enabled_count(Direction dir) const { return list_[static_cast<int>(dir)].size(); }

  Move select(double u) const {
    const double right_mass = static_cast<double>(list_[0].size()) * rate_[0];
    int d = 0;
    if (u >= right_mass || list_[0].empty()) {
      d = 1;
      u -= right_mass;
    }
    auto rank = static_cast<std::size_t>(u / rate_[d]);
    if (rank >= list_[d].size()) rank = list_[d].size() - 1;
    return {list_[d][rank], static_cast<Direction>(d)};
  }

 private:
  static constexpr std::uint32_t kAbsent = 0xFFFFFFFFu;
  double rate_[2] = {0.0, 0.0};
  std::vector<std::uint32_t> list_[2];
  std::vector<std::uint32_t> pos_[2];
};

}  // namespace fep
