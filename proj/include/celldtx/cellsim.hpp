#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "celldtx/actionspace.hpp"
#include "celldtx/traffic.hpp"

namespace celldtx {

// Relative power numbers for BS configuration set 2. DL power scales with
// the used bandwidth fraction s_f as 110 + 90*s_f; an active TTI with an
// empty queue sits at micro-sleep power.
inline constexpr double kMaxDlPower = 200.0;
inline constexpr double kIdleActivePower = 50.0;

enum class SleepMode { sm1, sm2, sm3 };

inline const char* sleep_mode_name(SleepMode m) {
  switch (m) {
    case SleepMode::sm1: return "SM1";
    case SleepMode::sm2: return "SM2";
    case SleepMode::sm3: return "SM3";
  }
  return "?";
}

struct SleepModeSpec {
  SleepMode mode;
  double power;             // relative power while asleep
  int transition_ms;        // total enter+leave time
  double transition_energy; // relative power * ms
};

// deepest first so cost ties resolve toward the deeper mode
inline const std::array<SleepModeSpec, 3>& sleep_mode_table() {
  static const std::array<SleepModeSpec, 3> t = {{
      {SleepMode::sm3, 1.0, 50, 1000.0},
      {SleepMode::sm2, 25.0, 6, 90.0},
      {SleepMode::sm1, 50.0, 0, 0.0},
  }};
  return t;
}

inline double dl_power(double s_f) {
  if (s_f < 0.0 || s_f > 1.0)
    throw std::invalid_argument("dl_power: bandwidth fraction outside [0,1]");
  return 110.0 + 90.0 * s_f;
}

struct SleepPlan {
  SleepMode mode;
  double energy;
};

// Cheapest sleep mode for a known inactive run. SM2/SM3 are feasible only
// when the gap is strictly larger than their transition time; SM1 always is.
inline SleepPlan plan_sleep(int gap_ms) {
  if (gap_ms < 1) throw std::invalid_argument("plan_sleep: gap must be >= 1 ms");
  bool have = false;
  SleepPlan best{SleepMode::sm1, 0.0};
  for (const auto& m : sleep_mode_table()) {
    if (m.transition_ms >= gap_ms) continue;  // strict: sleep must outlast the transition
    const double energy =
        m.transition_energy + (gap_ms - m.transition_ms) * m.power;
    if (!have || energy < best.energy) {
      best = {m.mode, energy};
      have = true;
    }
  }
  return best;
}

struct GapRecord {
  int start_ms;
  int length_ms;
  SleepMode mode;
  double energy;
};

// Power accounting for one window: active TTIs carry per-TTI samples,
// inactive TTIs are covered by exactly one gap record each.
struct PowerLedger {
  int t0 = 0, t1 = 0;
  std::vector<double> active_power;  // indexed t - t0; 0 when inactive
  std::vector<GapRecord> gaps;
  double total_energy = 0.0;

  int window_len() const { return t1 - t0; }
  double average_power() const { return total_energy / window_len(); }
};

struct CellScenario {
  long long capacity_bytes_per_tti = 0;  // full-bandwidth DL capacity
  std::vector<UeProfile> profiles;
  int min_deadline_ms = 0;
};

struct SimResult {
  int t0 = 0, t1 = 0;
  long long capacity = 0;
  std::vector<Packet> packets;          // packets that arrived in [t0, t1)
  PowerLedger ledger;
  std::vector<long long> bytes_sent;    // per TTI of the window

  double s_f(int t) const {
    return static_cast<double>(bytes_sent[static_cast<std::size_t>(t - t0)]) /
           static_cast<double>(capacity);
  }
};

// TTI-granular single-cell downlink simulator. The queue is FIFO by arrival;
// a pending packet is dropped the TTI its deadline expires, before serving.
// Configs may change at phase boundaries (the pattern re-anchors at the TTI
// the config is applied), which is how the harness chains reset and RL-step
// windows through one continuous queue.
class CellEngine {
 public:
  CellEngine(CellScenario scenario, std::vector<Packet> arrivals, int horizon_ms)
      : scenario_(std::move(scenario)),
        packets_(std::move(arrivals)),
        horizon_(horizon_ms) {
    if (scenario_.capacity_bytes_per_tti < 1)
      throw std::invalid_argument("CellEngine: capacity must be >= 1 byte/TTI");
    if (horizon_ < 1) throw std::invalid_argument("CellEngine: empty horizon");
    for (std::size_t i = 0; i < packets_.size(); ++i) {
      const Packet& p = packets_[i];
      if (p.arrival_ms < 0 || p.arrival_ms >= horizon_)
        throw std::invalid_argument("CellEngine: arrival outside horizon");
      if (i > 0 && packets_[i - 1].arrival_ms > p.arrival_ms)
        throw std::invalid_argument("CellEngine: arrivals not sorted");
      if (p.size_bytes < 1 || p.deadline_ms <= p.arrival_ms)
        throw std::invalid_argument("CellEngine: malformed packet");
    }
    for (auto& p : packets_) {
      p.remaining_bytes = p.size_bytes;
      p.status = PacketStatus::pending;
      p.resolved_at_ms = -1;
    }
    bytes_sent_.assign(static_cast<std::size_t>(horizon_), 0);
    power_.assign(static_cast<std::size_t>(horizon_), 0.0);
    active_.assign(static_cast<std::size_t>(horizon_), 0);
  }

  int now() const { return now_; }
  int horizon() const { return horizon_; }
  const CellScenario& scenario() const { return scenario_; }
  const std::vector<Packet>& packets() const { return packets_; }
  bool was_active(int t) const { return active_[static_cast<std::size_t>(t)] != 0; }
  long long bytes_sent_at(int t) const { return bytes_sent_[static_cast<std::size_t>(t)]; }

  // Applies from the current TTI on; the cycle grid re-anchors here.
  void set_config(const DtxConfig& cfg) {
    validate_config(cfg);
    config_ = cfg;
    anchor_ = now_;
  }

  void advance_to(int t_end) {
    if (t_end > horizon_) throw std::invalid_argument("advance_to: beyond horizon");
    for (; now_ < t_end; ++now_) step_tti();
  }

  void run_to_end() { advance_to(horizon_); }

  // Ledger + packet slice for [t0, t1); packets carry whatever status they
  // have at the time of the call, so resolve (advance past deadlines) before
  // computing QoS metrics.
  SimResult window_result(int t0, int t1) const {
    if (t0 < 0 || t1 > now_ || t1 <= t0)
      throw std::invalid_argument("window_result: window not simulated yet");
    SimResult r;
    r.t0 = t0;
    r.t1 = t1;
    r.capacity = scenario_.capacity_bytes_per_tti;
    for (const auto& p : packets_)
      if (p.arrival_ms >= t0 && p.arrival_ms < t1) r.packets.push_back(p);
    r.bytes_sent.assign(bytes_sent_.begin() + t0, bytes_sent_.begin() + t1);
    r.ledger.t0 = t0;
    r.ledger.t1 = t1;
    r.ledger.active_power.assign(power_.begin() + t0, power_.begin() + t1);
    double total = 0.0;
    int run_start = -1;
    for (int t = t0; t <= t1; ++t) {
      const bool inactive = t < t1 && !active_[static_cast<std::size_t>(t)];
      if (inactive) {
        if (run_start < 0) run_start = t;
      } else if (run_start >= 0) {
        const int len = t - run_start;
        const SleepPlan plan = plan_sleep(len);
        r.ledger.gaps.push_back({run_start, len, plan.mode, plan.energy});
        total += plan.energy;
        run_start = -1;
      }
      if (t < t1 && active_[static_cast<std::size_t>(t)])
        total += power_[static_cast<std::size_t>(t)];
    }
    r.ledger.total_energy = total;
    return r;
  }

 private:
  void step_tti() {
    const int t = now_;
    // enqueue this TTI's arrivals
    while (next_arrival_ < packets_.size() &&
           packets_[next_arrival_].arrival_ms == t) {
      pending_fifo_.push_back(next_arrival_);
      expiry_.push({packets_[next_arrival_].deadline_ms,
                    static_cast<int>(next_arrival_)});
      ++next_arrival_;
    }
    // expire overdue packets before serving
    while (!expiry_.empty() && expiry_.top().first <= t) {
      const int idx = expiry_.top().second;
      expiry_.pop();
      Packet& p = packets_[static_cast<std::size_t>(idx)];
      if (p.status == PacketStatus::pending) {
        p.status = PacketStatus::dropped;
        p.resolved_at_ms = t;
      }
    }
    const bool active = active_in_tti(rebased(), t);
    active_[static_cast<std::size_t>(t)] = active ? 1 : 0;
    if (!active) return;
    long long budget = scenario_.capacity_bytes_per_tti;
    while (budget > 0 && !pending_fifo_.empty()) {
      const std::size_t idx = pending_fifo_.front();
      Packet& p = packets_[idx];
      if (p.status != PacketStatus::pending) {  // already dropped
        pending_fifo_.pop_front();
        continue;
      }
      const long long send = std::min<long long>(budget, p.remaining_bytes);
      p.remaining_bytes -= send;
      budget -= send;
      if (p.remaining_bytes == 0) {
        p.status = PacketStatus::delivered;
        p.resolved_at_ms = t;
        pending_fifo_.pop_front();
      }
    }
    const long long sent = scenario_.capacity_bytes_per_tti - budget;
    bytes_sent_[static_cast<std::size_t>(t)] = sent;
    power_[static_cast<std::size_t>(t)] =
        sent > 0 ? dl_power(static_cast<double>(sent) /
                            static_cast<double>(scenario_.capacity_bytes_per_tti))
                 : kIdleActivePower;
  }

  DtxConfig rebased() const {
    DtxConfig c = config_;
    // shift the pattern so its cycle grid starts at the anchor TTI
    c.start_offset_ms = (anchor_ + config_.start_offset_ms) % config_.cycle_ms;
    return c;
  }

  CellScenario scenario_;
  std::vector<Packet> packets_;
  int horizon_;
  int now_ = 0;
  DtxConfig config_{1, 1, 0};
  int anchor_ = 0;
  std::size_t next_arrival_ = 0;
  std::deque<std::size_t> pending_fifo_;
  std::priority_queue<std::pair<int, int>, std::vector<std::pair<int, int>>,
                      std::greater<>>
      expiry_;  // (deadline, packet index)
  std::vector<long long> bytes_sent_;
  std::vector<double> power_;
  std::vector<std::uint8_t> active_;
};

// Single-window entry point: simulate [0, window_ms) plus a drain that only
// resolves packets; accounting covers the window alone.
inline SimResult run(const CellScenario& scenario, const DtxConfig& config,
                     int window_ms, int drain_ms, std::vector<Packet> arrivals) {
  if (window_ms < 1) throw std::invalid_argument("run: empty window");
  if (drain_ms < 0) throw std::invalid_argument("run: negative drain");
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    if (arrivals[i].arrival_ms < 0 || arrivals[i].arrival_ms >= window_ms)
      throw std::invalid_argument("run: arrival outside [0, window)");
    if (i > 0 && arrivals[i - 1].arrival_ms > arrivals[i].arrival_ms)
      throw std::invalid_argument("run: arrivals not sorted");
  }
  CellEngine engine(scenario, std::move(arrivals), window_ms + std::max(drain_ms, 1));
  engine.set_config(config);
  engine.run_to_end();
  return engine.window_result(0, window_ms);
}

// Structured-text export; verbose adds the per-TTI power/utilization series.
inline void write_sim_result(std::ostream& os, const SimResult& r,
                             bool verbose = false) {
  os << "window " << r.t0 << ' ' << r.t1 << " capacity " << r.capacity
     << " total_energy " << r.ledger.total_energy << '\n';
  for (const auto& p : r.packets) {
    os << "packet " << p.id << " ue " << p.ue << " arrival " << p.arrival_ms
       << " size " << p.size_bytes << " deadline " << p.deadline_ms << ' ';
    switch (p.status) {
      case PacketStatus::delivered: os << "delivered " << p.resolved_at_ms; break;
      case PacketStatus::dropped: os << "dropped " << p.resolved_at_ms; break;
      case PacketStatus::pending: os << "pending remaining " << p.remaining_bytes; break;
    }
    os << '\n';
  }
  for (const auto& g : r.ledger.gaps)
    os << "gap " << g.start_ms << " len " << g.length_ms << ' '
       << sleep_mode_name(g.mode) << " energy " << g.energy << '\n';
  if (verbose) {
    for (int t = r.t0; t < r.t1; ++t) {
      const std::size_t i = static_cast<std::size_t>(t - r.t0);
      os << "tti " << t << " sf " << r.s_f(t) << " power "
         << r.ledger.active_power[i] << '\n';
    }
  }
}

}  // namespace celldtx
