#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace celldtx {

// One cell DTX pattern at TTI (1 ms) granularity: the cell is active for
// on_ms out of every cycle_ms, starting start_offset_ms into the cycle
// grid. (1,1) is the always-active pattern.
struct DtxConfig {
  int cycle_ms = 1;
  int on_ms = 1;
  int start_offset_ms = 0;

  bool always_active() const { return on_ms >= cycle_ms; }
  bool operator==(const DtxConfig& o) const {
    return cycle_ms == o.cycle_ms && on_ms == o.on_ms &&
           start_offset_ms == o.start_offset_ms;
  }
};

inline void validate_config(const DtxConfig& c) {
  if (c.cycle_ms < 1 || c.on_ms < 1)
    throw std::invalid_argument("DtxConfig: cycle and on-duration must be >= 1 ms");
  if (c.on_ms > c.cycle_ms)
    throw std::invalid_argument("DtxConfig: on-duration exceeds cycle length");
  if (c.start_offset_ms < 0 || c.start_offset_ms >= c.cycle_ms)
    throw std::invalid_argument("DtxConfig: start offset out of [0, cycle)");
}

// true iff TTI t falls in the active part of the pattern
inline bool active_in_tti(const DtxConfig& c, long long t) {
  long long m = (t - c.start_offset_ms) % c.cycle_ms;
  if (m < 0) m += c.cycle_ms;
  return m < c.on_ms;
}

struct Gap {
  int start_ms = 0;
  int length_ms = 0;
  bool operator==(const Gap& o) const {
    return start_ms == o.start_ms && length_ms == o.length_ms;
  }
};

// Maximal runs of inactive TTIs within [t0, t1).
inline std::vector<Gap> non_active_gaps(const DtxConfig& c, int t0, int t1) {
  if (t1 <= t0) throw std::invalid_argument("non_active_gaps: empty window");
  std::vector<Gap> gaps;
  int run_start = -1;
  for (int t = t0; t < t1; ++t) {
    if (!active_in_tti(c, t)) {
      if (run_start < 0) run_start = t;
    } else if (run_start >= 0) {
      gaps.push_back({run_start, t - run_start});
      run_start = -1;
    }
  }
  if (run_start >= 0) gaps.push_back({run_start, t1 - run_start});
  return gaps;
}

// The legal (cycle, on-duration) action set: every cycle below the minimum
// delay requirement paired with every strictly shorter on-duration, plus the
// always-active pair (1,1) as the last action. Order is fixed (cycle asc,
// on asc, (1,1) last) so network output indices are stable.
struct ActionSpace {
  std::vector<DtxConfig> actions;

  int size() const { return static_cast<int>(actions.size()); }

  const DtxConfig& at(int index) const {
    if (index < 0 || index >= size())
      throw std::out_of_range("ActionSpace: index " + std::to_string(index));
    return actions[static_cast<std::size_t>(index)];
  }

  int index_of(int cycle_ms, int on_ms) const {
    for (int i = 0; i < size(); ++i)
      if (actions[i].cycle_ms == cycle_ms && actions[i].on_ms == on_ms) return i;
    return -1;
  }

  int always_active_index() const { return size() - 1; }
};

// Table I RRC values under the 1 ms-TTI simplification: fractional
// on-durations and the slot offset are dropped. Cycle values above 128 are
// elided in the table; only the listed ones are included (anything above the
// minimum delay requirement is filtered out anyway).
inline const std::vector<int>& default_cycle_set() {
  static const std::vector<int> v = {10, 20, 32, 40, 60, 64, 70, 80, 128, 10240};
  return v;
}

inline const std::vector<int>& default_on_duration_set() {
  static const std::vector<int> v = {1,  2,  3,  4,  5,   6,   8,  10,
                                     20, 30, 40, 50, 60, 80, 100, 1600};
  return v;
}

inline ActionSpace enumerate_actions(int min_deadline_ms,
                                     const std::vector<int>& cycle_set,
                                     const std::vector<int>& on_set) {
  if (min_deadline_ms <= 1)
    throw std::invalid_argument("enumerate_actions: min deadline must exceed 1 ms");
  if (cycle_set.empty() || on_set.empty())
    throw std::invalid_argument("enumerate_actions: empty value set");
  auto sorted_unique = [](std::vector<int> v, const char* what) {
    for (int x : v)
      if (x < 1) throw std::invalid_argument(std::string(what) + ": values must be positive integers");
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const std::vector<int> cycles = sorted_unique(cycle_set, "cycle set");
  const std::vector<int> ons = sorted_unique(on_set, "on-duration set");

  ActionSpace space;
  for (int c : cycles) {
    if (c >= min_deadline_ms) break;
    for (int o : ons) {
      if (o >= c) break;
      space.actions.push_back({c, o, 0});
    }
  }
  space.actions.push_back({1, 1, 0});
  return space;
}

inline ActionSpace enumerate_actions(int min_deadline_ms) {
  return enumerate_actions(min_deadline_ms, default_cycle_set(),
                           default_on_duration_set());
}

}  // namespace celldtx
