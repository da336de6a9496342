#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "celldtx/actionspace.hpp"
#include "celldtx/rng.hpp"

using namespace celldtx;

TEST_CASE("enumerate_actions admits Table I cycles below the minimum deadline") {
  const ActionSpace space = enumerate_actions(50);
  std::set<int> cycles;
  for (const auto& a : space.actions)
    if (!a.always_active()) cycles.insert(a.cycle_ms);
  REQUIRE(cycles == std::set<int>{10, 20, 32, 40});
}

TEST_CASE("enumerate_actions count matches brute-force enumeration") {
  // independent recount over the hard-coded value sets
  const std::vector<int> cycle_set = {10, 20, 32, 40, 60, 64, 70, 80, 128, 10240};
  const std::vector<int> on_set = {1, 2, 3, 4, 5, 6, 8, 10, 20, 30, 40, 50, 60, 80, 100, 1600};
  int expected = 1;  // the (1,1) action
  std::map<int, int> per_cycle;
  for (int c : cycle_set)
    if (c < 50)
      for (int o : on_set)
        if (o < c) {
          ++expected;
          ++per_cycle[c];
        }
  const ActionSpace space = enumerate_actions(50, cycle_set, on_set);
  REQUIRE(space.size() == expected);
  REQUIRE(space.size() == 36);
  REQUIRE(per_cycle[10] == 7);
  REQUIRE(per_cycle[20] == 8);
  REQUIRE(per_cycle[32] == 10);
  REQUIRE(per_cycle[40] == 10);
}

TEST_CASE("enumerate_actions with deadline 2 leaves only (1,1)") {
  const ActionSpace space = enumerate_actions(2);
  REQUIRE(space.size() == 1);
  REQUIRE(space.actions[0].cycle_ms == 1);
  REQUIRE(space.actions[0].on_ms == 1);
}

TEST_CASE("action space ordering and uniqueness") {
  const ActionSpace space = enumerate_actions(50);
  REQUIRE(space.actions.back().always_active());
  std::set<std::pair<int, int>> seen;
  for (const auto& a : space.actions) {
    REQUIRE(seen.insert({a.cycle_ms, a.on_ms}).second);
    if (!a.always_active()) {
      REQUIRE(a.on_ms < a.cycle_ms);
      REQUIRE(a.cycle_ms < 50);
    }
  }
  // (cycle asc, on asc) over the non-(1,1) prefix
  for (int i = 0; i + 2 < space.size(); ++i) {
    const auto& a = space.actions[i];
    const auto& b = space.actions[i + 1];
    REQUIRE((a.cycle_ms < b.cycle_ms ||
             (a.cycle_ms == b.cycle_ms && a.on_ms < b.on_ms)));
  }
  // invariant to input ordering
  std::vector<int> cycles = default_cycle_set();
  std::vector<int> ons = default_on_duration_set();
  std::reverse(cycles.begin(), cycles.end());
  std::reverse(ons.begin(), ons.end());
  const ActionSpace shuffled = enumerate_actions(50, cycles, ons);
  REQUIRE(shuffled.actions.size() == space.actions.size());
  for (int i = 0; i < space.size(); ++i)
    REQUIRE(shuffled.actions[i] == space.actions[i]);
}

TEST_CASE("enumerate_actions rejects bad input") {
  REQUIRE_THROWS_AS(enumerate_actions(1), std::invalid_argument);
  REQUIRE_THROWS_AS(enumerate_actions(50, {}, {1}), std::invalid_argument);
  REQUIRE_THROWS_AS(enumerate_actions(50, {10, -3}, {1}), std::invalid_argument);
}

TEST_CASE("active_in_tti basic patterns") {
  const DtxConfig c{10, 4, 0};
  for (int t = 0; t < 4; ++t) REQUIRE(active_in_tti(c, t));
  for (int t = 4; t < 10; ++t) REQUIRE_FALSE(active_in_tti(c, t));

  const DtxConfig aa{1, 1, 0};
  for (int t = 0; t < 100; ++t) REQUIRE(active_in_tti(aa, t));

  const DtxConfig shifted{10, 4, 3};
  REQUIRE_FALSE(active_in_tti(shifted, 2));
  REQUIRE(active_in_tti(shifted, 3));
  REQUIRE_FALSE(active_in_tti(shifted, 12));
}

TEST_CASE("active_in_tti is periodic and counts on_ms actives per cycle") {
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int cycle = 2 + static_cast<int>(rng.uniform_int(60));
    const int on = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cycle)));
    const int offset = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cycle)));
    const DtxConfig c{cycle, on, offset};
    for (int t = 0; t < 3 * cycle; ++t)
      REQUIRE(active_in_tti(c, t) == active_in_tti(c, t + cycle));
    // any window of exactly one cycle holds exactly on_ms active TTIs
    const int start = static_cast<int>(rng.uniform_int(100));
    int actives = 0;
    for (int t = start; t < start + cycle; ++t)
      if (active_in_tti(c, t)) ++actives;
    REQUIRE(actives == on);
  }
}

TEST_CASE("non_active_gaps tiles the window") {
  REQUIRE(non_active_gaps({10, 4, 0}, 0, 20) ==
          std::vector<Gap>{{4, 6}, {14, 6}});
  REQUIRE(non_active_gaps({1, 1, 0}, 0, 50).empty());
  REQUIRE(non_active_gaps({40, 10, 0}, 0, 40) == std::vector<Gap>{{10, 30}});

  RngStream rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int cycle = 2 + static_cast<int>(rng.uniform_int(40));
    const int on = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cycle - 1)));
    const DtxConfig c{cycle, on, static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cycle)))};
    const int t0 = static_cast<int>(rng.uniform_int(50));
    const int t1 = t0 + 1 + static_cast<int>(rng.uniform_int(200));
    const auto gaps = non_active_gaps(c, t0, t1);
    int covered = 0;
    for (const auto& g : gaps) {
      covered += g.length_ms;
      for (int t = g.start_ms; t < g.start_ms + g.length_ms; ++t)
        REQUIRE_FALSE(active_in_tti(c, t));
      // maximality
      if (g.start_ms > t0) REQUIRE(active_in_tti(c, g.start_ms - 1));
      if (g.start_ms + g.length_ms < t1)
        REQUIRE(active_in_tti(c, g.start_ms + g.length_ms));
    }
    int actives = 0;
    for (int t = t0; t < t1; ++t)
      if (active_in_tti(c, t)) ++actives;
    REQUIRE(covered + actives == t1 - t0);
    // interior (non-clipped) gaps all equal cycle - on
    for (const auto& g : gaps)
      if (g.start_ms > t0 && g.start_ms + g.length_ms < t1)
        REQUIRE(g.length_ms == cycle - on);
  }
}
