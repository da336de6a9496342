#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "celldtx/metrics.hpp"
#include "celldtx/neural.hpp"
#include "celldtx/rng.hpp"

namespace celldtx {

// One contextual-bandit sample: the reward observed after taking `action`
// in state `state`. No next-state, no discount.
struct Experience {
  std::array<double, Observation::kFeatures> state{};
  int action = 0;
  double reward = 0.0;
};

// Bounded FIFO of the most recent experiences, oldest evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  }

  void push(const Experience& e) {
    if (buf_.size() == capacity_) buf_.pop_front();
    buf_.push_back(e);
  }

  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return capacity_; }
  // index 0 is the oldest entry
  const Experience& operator[](std::size_t i) const { return buf_[i]; }

 private:
  std::deque<Experience> buf_;
  std::size_t capacity_;
};

// eps(t) = end + (start - end) * exp(-t / decay), t counted in episodes.
struct EpsilonSchedule {
  double start = 0.9;
  double end = 0.05;
  double decay = 50.0;

  double value(double episode) const {
    return end + (start - end) * std::exp(-episode / decay);
  }
};

inline int argmax_action(const Mlp& net, std::span<const double> normalizers,
                         const Observation& state) {
  const auto arr = state.as_array();
  const std::vector<double> q = forward(net, arr, normalizers);
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i)
    if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(best)]) best = i;
  return best;  // ties stay at the lowest index
}

// eps-greedy: uniform over all actions with probability eps, else the argmax
// of the predicted rewards.
inline int select_action(const Mlp& net, std::span<const double> normalizers,
                         const Observation& state, double eps, RngStream& rng) {
  if (eps > 0.0 && rng.uniform() < eps)
    return static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(net.output_size())));
  return argmax_action(net, normalizers, state);
}

// Per-feature max over the buffered states; a feature that is zero across the
// whole buffer gets 1 so the division is harmless. Fitted once, then frozen.
inline std::array<double, Observation::kFeatures> fit_normalizers(
    const ReplayBuffer& buffer, std::size_t threshold) {
  if (buffer.size() < threshold)
    throw std::logic_error("fit_normalizers: buffer below threshold");
  std::array<double, Observation::kFeatures> norm{};
  for (std::size_t i = 0; i < buffer.size(); ++i)
    for (int f = 0; f < Observation::kFeatures; ++f)
      norm[static_cast<std::size_t>(f)] =
          std::max(norm[static_cast<std::size_t>(f)],
                   buffer[i].state[static_cast<std::size_t>(f)]);
  for (auto& v : norm)
    if (v == 0.0) v = 1.0;
  return norm;
}

// Draw `count` distinct indices from [0, n), Floyd's algorithm; the returned
// order is the draw order (it fixes gradient accumulation order).
inline std::vector<std::size_t> sample_without_replacement(RngStream& rng,
                                                           std::size_t n,
                                                           std::size_t count) {
  if (count > n)
    throw std::invalid_argument("sample_without_replacement: count > n");
  std::vector<std::size_t> out;
  out.reserve(count);
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.uniform_int(j + 1));
    if (seen.insert(t).second) {
      out.push_back(t);
    } else {
      seen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

// One optimization step: a uniform random batch (without replacement), the
// stored reward as the regression target for the chosen output node, one
// backward + Adam update. Returns the batch loss.
inline double train_step(Mlp& net, AdamState& adam, const ReplayBuffer& buffer,
                         std::span<const double> normalizers, int batch_size,
                         double smooth_l1_beta, RngStream& rng,
                         Gradients& scratch) {
  if (batch_size < 1) throw std::invalid_argument("train_step: empty batch");
  if (buffer.size() < static_cast<std::size_t>(batch_size))
    throw std::logic_error("train_step: buffer smaller than batch");
  const auto idx =
      sample_without_replacement(rng, buffer.size(), static_cast<std::size_t>(batch_size));
  std::vector<const double*> states;
  std::vector<int> actions;
  std::vector<double> targets;
  states.reserve(idx.size());
  actions.reserve(idx.size());
  targets.reserve(idx.size());
  for (std::size_t i : idx) {
    const Experience& e = buffer[i];
    states.push_back(e.state.data());
    actions.push_back(e.action);
    targets.push_back(e.reward);  // contextual bandit: raw reward, no bootstrap
  }
  const double loss =
      backward(net, normalizers, states, actions, targets, smooth_l1_beta, scratch);
  adam_step(net, scratch, adam);
  return loss;
}

// Mean over the probe states of the best predicted reward; sampled
// periodically it is the Q-convergence series.
inline double probe_q(const Mlp& net, std::span<const double> normalizers,
                      const std::vector<std::array<double, Observation::kFeatures>>& probe) {
  if (probe.empty()) throw std::invalid_argument("probe_q: empty probe set");
  double sum = 0.0;
  for (const auto& s : probe) {
    const std::vector<double> q = forward(net, s, normalizers);
    double best = q[0];
    for (double v : q) best = std::max(best, v);
    sum += best;
  }
  return sum / static_cast<double>(probe.size());
}

}  // namespace celldtx
