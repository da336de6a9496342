#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "celldtx/rng.hpp"

namespace celldtx {

// Fully-connected ReLU stack, double precision. weights[l] is row-major
// (sizes[l+1] x sizes[l]); ReLU on every layer but the last, which is linear.
struct Mlp {
  std::vector<int> sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  int n_layers() const { return static_cast<int>(sizes.size()) - 1; }
  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
};

// Fan-in-scaled uniform init (bound 1/sqrt(fan_in)), zero biases.
inline Mlp init_mlp(const std::vector<int>& sizes, RngStream& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("init_mlp: need >= 2 layer sizes");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("init_mlp: layer sizes must be positive");
  Mlp net;
  net.sizes = sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    for (auto& x : w) x = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
  }
  return net;
}

inline bool all_finite(const Mlp& net) {
  for (const auto& w : net.weights)
    for (double x : w)
      if (!std::isfinite(x)) return false;
  for (const auto& b : net.biases)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

// Full forward pass: input scaled elementwise by the normalizers, then the
// affine/ReLU stack. Returns the predicted reward per action.
inline std::vector<double> forward(const Mlp& net, std::span<const double> input,
                                   std::span<const double> normalizers) {
  if (static_cast<int>(input.size()) != net.input_size() ||
      static_cast<int>(normalizers.size()) != net.input_size())
    throw std::invalid_argument("forward: input/normalizer shape mismatch");
  std::vector<double> cur(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!(normalizers[i] > 0.0))
      throw std::invalid_argument("forward: normalizers must be strictly positive");
    cur[i] = input[i] / normalizers[i];
  }
  const int L = net.n_layers();
  for (int l = 0; l < L; ++l) {
    const int in = net.sizes[l], out = net.sizes[l + 1];
    std::vector<double> next(static_cast<std::size_t>(out));
    const double* w = net.weights[l].data();
    for (int o = 0; o < out; ++o) {
      double acc = net.biases[l][static_cast<std::size_t>(o)];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * cur[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = (l + 1 < L && acc < 0.0) ? 0.0 : acc;
    }
    cur = std::move(next);
  }
  return cur;
}

struct SmoothL1 {
  double loss;
  double grad;  // d loss / d predicted
};

inline SmoothL1 smooth_l1(double predicted, double target, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("smooth_l1: beta must be positive");
  const double d = predicted - target;
  if (std::abs(d) < beta) return {d * d / (2.0 * beta), d / beta};
  return {std::abs(d) - beta / 2.0, d > 0.0 ? 1.0 : -1.0};
}

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

inline Gradients zero_gradients(const Mlp& net) {
  Gradients g;
  for (const auto& w : net.weights) g.weights.emplace_back(w.size(), 0.0);
  for (const auto& b : net.biases) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

namespace detail {

// Forward with cached activations; computes the output node for one action
// only (the loss touches nothing else).
inline double forward_cached(const Mlp& net, std::span<const double> normalizers,
                             const double* state, int action,
                             std::vector<std::vector<double>>& acts) {
  const int L = net.n_layers();
  acts.resize(static_cast<std::size_t>(L));  // acts[0] = input, acts[1..L-1] hidden
  acts[0].resize(static_cast<std::size_t>(net.input_size()));
  for (int i = 0; i < net.input_size(); ++i)
    acts[0][static_cast<std::size_t>(i)] =
        state[i] / normalizers[static_cast<std::size_t>(i)];
  const std::vector<double>* prev = &acts[0];
  for (int l = 0; l + 1 < L; ++l) {
    const int in = net.sizes[l], out = net.sizes[l + 1];
    auto& a = acts[static_cast<std::size_t>(l + 1)];
    a.assign(static_cast<std::size_t>(out), 0.0);
    const double* w = net.weights[l].data();
    for (int o = 0; o < out; ++o) {
      double acc = net.biases[l][static_cast<std::size_t>(o)];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * (*prev)[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(o)] = acc > 0.0 ? acc : 0.0;
    }
    prev = &a;
  }
  const int in = net.sizes[static_cast<std::size_t>(L - 1)];
  const double* row =
      net.weights[static_cast<std::size_t>(L - 1)].data() + static_cast<std::size_t>(action) * in;
  double acc = net.biases[static_cast<std::size_t>(L - 1)][static_cast<std::size_t>(action)];
  for (int i = 0; i < in; ++i) acc += row[i] * (*prev)[static_cast<std::size_t>(i)];
  return acc;
}

}  // namespace detail

// Mean smooth-L1 loss over the batch, gradient only through each entry's
// chosen output node. Returns the loss; grads are overwritten.
inline double backward(const Mlp& net, std::span<const double> normalizers,
                       const std::vector<const double*>& states,
                       const std::vector<int>& actions,
                       const std::vector<double>& targets, double beta,
                       Gradients& grads) {
  const std::size_t B = states.size();
  if (B == 0) throw std::invalid_argument("backward: empty batch");
  if (actions.size() != B || targets.size() != B)
    throw std::invalid_argument("backward: batch arrays disagree");
  for (int a : actions)
    if (a < 0 || a >= net.output_size())
      throw std::out_of_range("backward: action index out of range");
  if (grads.weights.size() != net.weights.size()) grads = zero_gradients(net);
  for (auto& w : grads.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : grads.biases) std::fill(b.begin(), b.end(), 0.0);

  const int L = net.n_layers();
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, delta_prev;
  double loss_sum = 0.0;

  for (std::size_t s = 0; s < B; ++s) {
    const int k = actions[s];
    const double pred = detail::forward_cached(net, normalizers, states[s], k, acts);
    const SmoothL1 sl = smooth_l1(pred, targets[s], beta);
    loss_sum += sl.loss;
    const double g = sl.grad;

    // output layer: only row k carries gradient
    const int last_in = net.sizes[static_cast<std::size_t>(L - 1)];
    const auto& a_last = acts[static_cast<std::size_t>(L - 1)];
    {
      double* gw = grads.weights[static_cast<std::size_t>(L - 1)].data() +
                   static_cast<std::size_t>(k) * last_in;
      for (int i = 0; i < last_in; ++i) gw[i] += g * a_last[static_cast<std::size_t>(i)];
      grads.biases[static_cast<std::size_t>(L - 1)][static_cast<std::size_t>(k)] += g;
    }
    delta.assign(static_cast<std::size_t>(last_in), 0.0);
    {
      const double* row = net.weights[static_cast<std::size_t>(L - 1)].data() +
                          static_cast<std::size_t>(k) * last_in;
      for (int i = 0; i < last_in; ++i) delta[static_cast<std::size_t>(i)] = g * row[i];
    }

    // hidden layers
    for (int l = L - 2; l >= 0; --l) {
      const int in = net.sizes[static_cast<std::size_t>(l)];
      const int out = net.sizes[static_cast<std::size_t>(l + 1)];
      const auto& a_out = acts[static_cast<std::size_t>(l + 1)];
      const auto& a_in = acts[static_cast<std::size_t>(l)];
      // ReLU mask
      for (int o = 0; o < out; ++o)
        if (a_out[static_cast<std::size_t>(o)] <= 0.0) delta[static_cast<std::size_t>(o)] = 0.0;
      double* gw = grads.weights[static_cast<std::size_t>(l)].data();
      double* gb = grads.biases[static_cast<std::size_t>(l)].data();
      for (int o = 0; o < out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        if (d == 0.0) continue;
        double* grow = gw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += d * a_in[static_cast<std::size_t>(i)];
        gb[o] += d;
      }
      if (l > 0) {
        delta_prev.assign(static_cast<std::size_t>(in), 0.0);
        const double* w = net.weights[static_cast<std::size_t>(l)].data();
        for (int o = 0; o < out; ++o) {
          const double d = delta[static_cast<std::size_t>(o)];
          if (d == 0.0) continue;
          const double* row = w + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i) delta_prev[static_cast<std::size_t>(i)] += d * row[i];
        }
        std::swap(delta, delta_prev);
      }
    }
  }

  const double inv_b = 1.0 / static_cast<double>(B);
  for (auto& w : grads.weights)
    for (auto& x : w) x *= inv_b;
  for (auto& b : grads.biases)
    for (auto& x : b) x *= inv_b;
  return loss_sum * inv_b;
}

// Forward-only batch loss; the finite-difference oracle in the tests uses it.
inline double batch_loss(const Mlp& net, std::span<const double> normalizers,
                         const std::vector<const double*>& states,
                         const std::vector<int>& actions,
                         const std::vector<double>& targets, double beta) {
  const std::size_t B = states.size();
  if (B == 0) throw std::invalid_argument("batch_loss: empty batch");
  double sum = 0.0;
  std::vector<std::vector<double>> acts;
  for (std::size_t s = 0; s < B; ++s) {
    const double pred =
        detail::forward_cached(net, normalizers, states[s], actions[s], acts);
    sum += smooth_l1(pred, targets[s], beta).loss;
  }
  return sum / static_cast<double>(B);
}

// Bias-corrected Adam.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  Gradients m, v;
};

inline AdamState make_adam_state(const Mlp& net, double lr = 1e-3,
                                 double beta1 = 0.9, double beta2 = 0.999,
                                 double eps = 1e-8) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.m = zero_gradients(net);
  s.v = zero_gradients(net);
  return s;
}

inline void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != net.weights.size())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    if (p.size() != g.size()) throw std::invalid_argument("adam_step: size mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
    update(net.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

}  // namespace celldtx
