#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "celldtx/cellsim.hpp"

namespace celldtx {

// The 8-feature RAN observation for one cell and one window. Field order is
// frozen: it is the network input layout and the CSV column order.
struct Observation {
  double traffic_intensity = 0.0;   // arrived bytes / window ms
  double interarrival_mean = 0.0;   // ms, cell-aggregate stream
  double interarrival_var = 0.0;    // ms^2, population variance
  double pktsize_mean = 0.0;        // bytes
  double pktsize_var = 0.0;         // bytes^2, population variance
  double delay_min = 0.0;           // ms
  double delay_wavg = 0.0;          // ms, weighted by packet size
  double tx_capability = 0.0;       // bytes/ms

  static constexpr int kFeatures = 8;

  std::array<double, kFeatures> as_array() const {
    return {traffic_intensity, interarrival_mean, interarrival_var,
            pktsize_mean,      pktsize_var,       delay_min,
            delay_wavg,        tx_capability};
  }

  static Observation from_array(const std::array<double, kFeatures>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }

  static const std::array<const char*, kFeatures>& feature_names() {
    static const std::array<const char*, kFeatures> names = {
        "traffic_intensity", "interarrival_mean", "interarrival_var",
        "pktsize_mean",      "pktsize_var",       "delay_min",
        "delay_wavg",        "tx_capability"};
    return names;
  }
};

// Delivered data ratio y = y_a / (y_a + y_f) over packets that arrived in the
// window. Requires every such packet resolved (the drain guarantees it);
// defined as 1 for an empty window.
inline double delivered_data_ratio(const SimResult& r) {
  long long delivered = 0, failed = 0;
  for (const auto& p : r.packets) {
    switch (p.status) {
      case PacketStatus::delivered:
        delivered += p.size_bytes;
        break;
      case PacketStatus::dropped:
        failed += p.size_bytes;
        break;
      case PacketStatus::pending:
        throw std::logic_error(
            "delivered_data_ratio: unresolved packet in window (drain too short?)");
    }
  }
  const long long total = delivered + failed;
  if (total == 0) return 1.0;
  return static_cast<double>(delivered) / static_cast<double>(total);
}

// Normalized power x = average relative power / 200.
inline double normalized_power(const PowerLedger& ledger) {
  if (ledger.window_len() <= 0)
    throw std::invalid_argument("normalized_power: empty ledger");
  return ledger.average_power() / kMaxDlPower;
}

// Mean bandwidth fraction over the window (inactive TTIs count as 0).
inline double prb_utilization(const SimResult& r) {
  long long sent = 0;
  for (long long b : r.bytes_sent) sent += b;
  return static_cast<double>(sent) /
         (static_cast<double>(r.capacity) * static_cast<double>(r.t1 - r.t0));
}

inline Observation extract_observation(const SimResult& r) {
  Observation o;
  const int window = r.t1 - r.t0;

  long long total_bytes = 0;
  for (const auto& p : r.packets) total_bytes += p.size_bytes;
  o.traffic_intensity = static_cast<double>(total_bytes) / window;

  const std::size_t n = r.packets.size();
  if (n >= 2) {
    double mean = 0.0;
    for (std::size_t i = 1; i < n; ++i)
      mean += r.packets[i].arrival_ms - r.packets[i - 1].arrival_ms;
    mean /= static_cast<double>(n - 1);
    double var = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double d = (r.packets[i].arrival_ms - r.packets[i - 1].arrival_ms) - mean;
      var += d * d;
    }
    o.interarrival_mean = mean;
    o.interarrival_var = var / static_cast<double>(n - 1);
  }

  if (n >= 1) {
    double mean = 0.0;
    for (const auto& p : r.packets) mean += p.size_bytes;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& p : r.packets) {
      const double d = p.size_bytes - mean;
      var += d * d;
    }
    o.pktsize_mean = mean;
    o.pktsize_var = var / static_cast<double>(n);

    double dmin = r.packets.front().delay_req_ms();
    double wsum = 0.0;
    for (const auto& p : r.packets) {
      dmin = std::min(dmin, static_cast<double>(p.delay_req_ms()));
      wsum += static_cast<double>(p.size_bytes) * p.delay_req_ms();
    }
    o.delay_min = dmin;
    o.delay_wavg = total_bytes > 0 ? wsum / static_cast<double>(total_bytes) : 0.0;
  }

  // bytes / bandwidth fraction, averaged over transmitting TTIs: recovers the
  // full-bandwidth capability exactly when capacity is constant
  double cap_sum = 0.0;
  int cap_count = 0;
  for (int t = r.t0; t < r.t1; ++t) {
    const long long sent = r.bytes_sent[static_cast<std::size_t>(t - r.t0)];
    if (sent > 0) {
      cap_sum += static_cast<double>(sent) / r.s_f(t);
      ++cap_count;
    }
  }
  o.tx_capability = cap_count > 0 ? cap_sum / cap_count : 0.0;
  return o;
}

struct PeriodMetrics {
  double x = 0.0;        // normalized power, (0, 1]
  double y = 1.0;        // delivered data ratio, [0, 1]
  double prb_util = 0.0; // mean s_f
};

inline PeriodMetrics period_metrics(const SimResult& r) {
  return {normalized_power(r.ledger), delivered_data_ratio(r), prb_utilization(r)};
}

}  // namespace celldtx
