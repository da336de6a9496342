#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "celldtx/rng.hpp"
#include "celldtx/traffic.hpp"

using namespace celldtx;

namespace {
const TrafficValueSets kDefaultSets = {
    {125, 150, 175, 200, 225, 250, 275, 300, 325, 350, 375, 400, 425, 450, 475, 500},
    {10, 15, 20},
    {50, 75, 100}};
}

TEST_CASE("sample_ue_profiles draws every field from its set") {
  RngStream rng(3);
  const auto profiles = sample_ue_profiles(rng, 10, kDefaultSets);
  REQUIRE(profiles.size() == 10);
  for (const auto& p : profiles) {
    REQUIRE(std::count(kDefaultSets.packet_sizes_bytes.begin(),
                       kDefaultSets.packet_sizes_bytes.end(), p.packet_size_bytes) == 1);
    REQUIRE(std::count(kDefaultSets.interarrival_means_ms.begin(),
                       kDefaultSets.interarrival_means_ms.end(),
                       p.mean_interarrival_ms) == 1);
    REQUIRE(std::count(kDefaultSets.delay_reqs_ms.begin(),
                       kDefaultSets.delay_reqs_ms.end(), p.delay_req_ms) == 1);
  }
}

TEST_CASE("sample_ue_profiles with singleton sets is forced") {
  RngStream rng(9);
  const TrafficValueSets sets = {{300}, {15}, {75}};
  const auto profiles = sample_ue_profiles(rng, 1, sets);
  REQUIRE(profiles.size() == 1);
  REQUIRE(profiles[0].packet_size_bytes == 300);
  REQUIRE(profiles[0].mean_interarrival_ms == 15);
  REQUIRE(profiles[0].delay_req_ms == 75);
}

TEST_CASE("sample_ue_profiles is deterministic per seed") {
  RngStream a(42), b(42);
  const auto pa = sample_ue_profiles(a, 20, kDefaultSets);
  const auto pb = sample_ue_profiles(b, 20, kDefaultSets);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    REQUIRE(pa[i].packet_size_bytes == pb[i].packet_size_bytes);
    REQUIRE(pa[i].mean_interarrival_ms == pb[i].mean_interarrival_ms);
    REQUIRE(pa[i].delay_req_ms == pb[i].delay_req_ms);
  }
}

TEST_CASE("generate_arrivals Poisson mean is right over seeded runs") {
  const UeProfile p{300, 10, 50};
  long long total = 0;
  const int runs = 200;
  for (int s = 0; s < runs; ++s) {
    RngStream rng(1000 + static_cast<std::uint64_t>(s));
    total += static_cast<long long>(generate_arrivals(p, 1000, rng).size());
  }
  const double mean = static_cast<double>(total) / runs;
  // expected count 100 per run, sd of the mean = 10/sqrt(200)
  REQUIRE(std::abs(mean - 100.0) < 3.0 * 10.0 / std::sqrt(static_cast<double>(runs)));
}

TEST_CASE("deterministic mode yields floor(T/mean) packets and ignores the rng") {
  const UeProfile p{500, 10, 50};
  RngStream a(1), b(777);
  a.uniform();  // desync the streams on purpose
  const auto ta = generate_arrivals(p, 1000, a, true);
  const auto tb = generate_arrivals(p, 1000, b, true);
  REQUIRE(ta.size() == 100);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    REQUIRE(ta[i].arrival_ms == tb[i].arrival_ms);
    REQUIRE(ta[i].arrival_ms == static_cast<int>(i) * 10);
  }
}

TEST_CASE("every packet carries deadline = arrival + delay requirement") {
  const UeProfile p{500, 20, 50};
  RngStream rng(5);
  for (const auto& pk : generate_arrivals(p, 2000, rng)) {
    REQUIRE(pk.deadline_ms - pk.arrival_ms == 50);
    REQUIRE(pk.size_bytes == 500);
    REQUIRE(pk.remaining_bytes == 500);
    REQUIRE(pk.status == PacketStatus::pending);
  }
}

TEST_CASE("quantization never reorders arrivals within a UE") {
  const UeProfile p{125, 10, 100};
  RngStream rng(17);
  const auto pk = generate_arrivals(p, 5000, rng);
  for (std::size_t i = 1; i < pk.size(); ++i)
    REQUIRE(pk[i - 1].arrival_ms <= pk[i].arrival_ms);
}

TEST_CASE("merged stream is sorted and conserves bytes") {
  RngStream rng(23);
  const auto profiles = sample_ue_profiles(rng, 8, kDefaultSets);
  std::vector<std::vector<Packet>> per_ue;
  long long bytes = 0;
  for (const auto& p : profiles) {
    per_ue.push_back(generate_arrivals(p, 1500, rng));
    for (const auto& pk : per_ue.back()) bytes += pk.size_bytes;
  }
  const auto merged = merge_arrivals(std::move(per_ue));
  long long merged_bytes = 0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    merged_bytes += merged[i].size_bytes;
    REQUIRE(merged[i].id == static_cast<int>(i));
    REQUIRE(merged[i].ue >= 0);
    REQUIRE(merged[i].ue < 8);
    if (i > 0) REQUIRE(merged[i - 1].arrival_ms <= merged[i].arrival_ms);
  }
  REQUIRE(merged_bytes == bytes);
}

TEST_CASE("trace export round-trips") {
  RngStream rng(31);
  const auto profiles = sample_ue_profiles(rng, 3, kDefaultSets);
  std::vector<std::vector<Packet>> per_ue;
  for (const auto& p : profiles) per_ue.push_back(generate_arrivals(p, 800, rng));
  const auto merged = merge_arrivals(std::move(per_ue));

  std::stringstream ss;
  write_trace(ss, merged);
  const auto back = read_trace(ss);
  REQUIRE(back.size() == merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    REQUIRE(back[i].id == merged[i].id);
    REQUIRE(back[i].ue == merged[i].ue);
    REQUIRE(back[i].arrival_ms == merged[i].arrival_ms);
    REQUIRE(back[i].size_bytes == merged[i].size_bytes);
    REQUIRE(back[i].deadline_ms == merged[i].deadline_ms);
  }
}
