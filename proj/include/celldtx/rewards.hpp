#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace celldtx {

// r = -(1-c)x - c(1-y). c trades energy (x term) against QoS (1-y term).
inline double reward_linear(double x, double y, double c) {
  if (c < 0.0 || c > 1.0)
    throw std::invalid_argument("reward_linear: c outside [0,1]");
  return -(1.0 - c) * x - c * (1.0 - y);
}

// -a*x when the QoS target y0 is met, y - b otherwise. -a >= y0 - b keeps
// every met-target reward at least as large as any missed-target reward.
// The example constants a = 1, b = 1 + y0 sit exactly on the bound, so the
// check leaves room for rounding.
inline double reward_qos_threshold(double x, double y, double a, double b,
                                   double y0) {
  if (a <= 0.0 || -a < y0 - b - 1e-12)
    throw std::invalid_argument("reward_qos_threshold: need a > 0 and -a >= y0 - b");
  return y >= y0 ? -a * x : y - b;
}

// Smooth approximation of the threshold reward:
//   r = -(u*[1 + (alpha-1)(1-y)] + x) / (u + 1),  u = [(1-y)/((1-y0)(1-x))]^m
// u is computed from (1-y) first so y = 1 gives u = 0 (r = -x) even at x = 1;
// x = 1 with y < 1 takes the u -> inf limit. Log-space u avoids overflow at
// large m.
inline double reward_qos_approx(double x, double y, double y0, double m,
                                double alpha) {
  if (!(y0 > 0.0 && y0 < 1.0))
    throw std::invalid_argument("reward_qos_approx: need 0 < y0 < 1");
  if (m <= 0.0 || alpha <= 1.0)
    throw std::invalid_argument("reward_qos_approx: need m > 0 and alpha > 1");
  const double fail = 1.0 - y;
  if (fail <= 0.0) return -x;  // u = 0 exactly
  const double amplitude = 1.0 + (alpha - 1.0) * fail;
  if (x >= 1.0) return -amplitude;
  const double log_u =
      m * (std::log(fail) - std::log(1.0 - y0) - std::log(1.0 - x));
  if (log_u > 700.0) return -amplitude;
  const double u = std::exp(log_u);
  return -(u * amplitude + x) / (u + 1.0);
}

enum class RewardKind { linear, qos_threshold, qos_approx };

inline const char* reward_kind_name(RewardKind k) {
  switch (k) {
    case RewardKind::linear: return "linear";
    case RewardKind::qos_threshold: return "qos_threshold";
    case RewardKind::qos_approx: return "qos_approx";
  }
  return "?";
}

inline RewardKind reward_kind_from_name(const std::string& s) {
  if (s == "linear") return RewardKind::linear;
  if (s == "qos_threshold") return RewardKind::qos_threshold;
  if (s == "qos_approx") return RewardKind::qos_approx;
  throw std::invalid_argument("unknown reward kind: " + s);
}

// Reward selection plus constants; defaults are the best-found values
// (c = 0.75 linear; y0 = 0.9, m = 2, alpha = 3 approximated QoS).
struct RewardSpec {
  RewardKind kind = RewardKind::qos_approx;
  double c = 0.75;                 // linear
  double a = 1.0, b = 1.9;         // qos_threshold (b = 1 + y0)
  double y0 = 0.9;                 // qos_threshold and qos_approx
  double m = 2.0, alpha = 3.0;     // qos_approx

  void validate() const {
    switch (kind) {
      case RewardKind::linear:
        if (c < 0.0 || c > 1.0) throw std::invalid_argument("reward: c outside [0,1]");
        break;
      case RewardKind::qos_threshold:
        if (a <= 0.0 || -a < y0 - b - 1e-12)
          throw std::invalid_argument("reward: need a > 0 and -a >= y0 - b");
        if (!(y0 > 0.0 && y0 < 1.0))
          throw std::invalid_argument("reward: need 0 < y0 < 1");
        break;
      case RewardKind::qos_approx:
        if (!(y0 > 0.0 && y0 < 1.0))
          throw std::invalid_argument("reward: need 0 < y0 < 1");
        if (m <= 0.0 || alpha <= 1.0)
          throw std::invalid_argument("reward: need m > 0 and alpha > 1");
        break;
    }
  }

  double evaluate(double x, double y) const {
    switch (kind) {
      case RewardKind::linear: return reward_linear(x, y, c);
      case RewardKind::qos_threshold: return reward_qos_threshold(x, y, a, b, y0);
      case RewardKind::qos_approx: return reward_qos_approx(x, y, y0, m, alpha);
    }
    throw std::logic_error("reward: bad kind");
  }
};

}  // namespace celldtx
