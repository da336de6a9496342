#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "celldtx/rng.hpp"

namespace celldtx {

// Per-UE traffic profile, drawn once per deployment (FTP model 3 adapted to
// delay-constrained packets: Poisson arrivals of fixed-size packets).
struct UeProfile {
  int packet_size_bytes = 0;
  int mean_interarrival_ms = 0;
  int delay_req_ms = 0;
};

struct TrafficValueSets {
  std::vector<int> packet_sizes_bytes;
  std::vector<int> interarrival_means_ms;
  std::vector<int> delay_reqs_ms;
};

enum class PacketStatus { pending, delivered, dropped };

struct Packet {
  int id = -1;
  int ue = -1;
  int arrival_ms = 0;
  int size_bytes = 0;
  int deadline_ms = 0;  // arrival + delay requirement
  long long remaining_bytes = 0;
  PacketStatus status = PacketStatus::pending;
  int resolved_at_ms = -1;  // delivery or drop time

  int delay_req_ms() const { return deadline_ms - arrival_ms; }
};

// Draw order per UE is (size, inter-arrival mean, delay requirement); keep it
// fixed, the streams are shared across runs.
inline std::vector<UeProfile> sample_ue_profiles(RngStream& rng, int n_ues,
                                                 const TrafficValueSets& sets) {
  if (n_ues < 1) throw std::invalid_argument("sample_ue_profiles: n_ues must be >= 1");
  if (sets.packet_sizes_bytes.empty() || sets.interarrival_means_ms.empty() ||
      sets.delay_reqs_ms.empty())
    throw std::invalid_argument("sample_ue_profiles: empty value set");
  std::vector<UeProfile> out;
  out.reserve(static_cast<std::size_t>(n_ues));
  for (int i = 0; i < n_ues; ++i) {
    UeProfile p;
    p.packet_size_bytes = rng.pick(sets.packet_sizes_bytes);
    p.mean_interarrival_ms = rng.pick(sets.interarrival_means_ms);
    p.delay_req_ms = rng.pick(sets.delay_reqs_ms);
    out.push_back(p);
  }
  return out;
}

// Arrivals for one UE over [0, window_ms), floored to the TTI grid.
// Deterministic mode pins every inter-arrival at the mean with the first
// packet at t = 0 (so a window of k*mean holds exactly k packets); it exists
// for oracle tests only.
inline std::vector<Packet> generate_arrivals(const UeProfile& profile, int window_ms,
                                             RngStream& rng,
                                             bool deterministic = false) {
  if (window_ms <= 0) throw std::invalid_argument("generate_arrivals: empty window");
  if (profile.packet_size_bytes < 1 || profile.mean_interarrival_ms < 1 ||
      profile.delay_req_ms < 1)
    throw std::invalid_argument("generate_arrivals: invalid profile");
  std::vector<Packet> out;
  double t = 0.0;
  if (!deterministic) t = rng.exponential(profile.mean_interarrival_ms);
  while (true) {
    const int arrival = static_cast<int>(std::floor(t));
    if (arrival >= window_ms) break;
    Packet p;
    p.arrival_ms = arrival;
    p.size_bytes = profile.packet_size_bytes;
    p.deadline_ms = arrival + profile.delay_req_ms;
    p.remaining_bytes = profile.packet_size_bytes;
    out.push_back(p);
    t += deterministic ? profile.mean_interarrival_ms
                       : rng.exponential(profile.mean_interarrival_ms);
  }
  return out;
}

// Merge per-UE streams into the cell arrival stream: sorted by arrival with
// (ue, per-UE order) as the tie break, ids assigned in final order.
inline std::vector<Packet> merge_arrivals(std::vector<std::vector<Packet>> per_ue) {
  std::vector<Packet> merged;
  std::size_t total = 0;
  for (const auto& v : per_ue) total += v.size();
  merged.reserve(total);
  for (std::size_t ue = 0; ue < per_ue.size(); ++ue) {
    for (auto& p : per_ue[ue]) {
      p.ue = static_cast<int>(ue);
      merged.push_back(p);
    }
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const Packet& a, const Packet& b) {
                     if (a.arrival_ms != b.arrival_ms) return a.arrival_ms < b.arrival_ms;
                     return a.ue < b.ue;
                   });
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i].id = static_cast<int>(i);
  return merged;
}

// Line-based trace format for replay: "id ue arrival size deadline".
inline void write_trace(std::ostream& os, const std::vector<Packet>& packets) {
  for (const auto& p : packets)
    os << p.id << ' ' << p.ue << ' ' << p.arrival_ms << ' ' << p.size_bytes << ' '
       << p.deadline_ms << '\n';
}

inline std::vector<Packet> read_trace(std::istream& is) {
  std::vector<Packet> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Packet p;
    if (!(ls >> p.id >> p.ue >> p.arrival_ms >> p.size_bytes >> p.deadline_ms))
      throw std::runtime_error("read_trace: malformed line: " + line);
    p.remaining_bytes = p.size_bytes;
    out.push_back(p);
  }
  return out;
}

}  // namespace celldtx
