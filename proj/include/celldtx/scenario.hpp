#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "celldtx/actionspace.hpp"
#include "celldtx/cellsim.hpp"
#include "celldtx/rewards.hpp"
#include "celldtx/rng.hpp"
#include "celldtx/traffic.hpp"

namespace celldtx {

struct AgentConfig {
  std::size_t buffer_capacity = 10000;
  int batch_size = 128;
  int threshold_factor = 10;  // train threshold = factor * batch_size
  std::vector<int> hidden_sizes = {128, 128};
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double smooth_l1_beta = 1.0;
  double eps_start = 0.9;
  double eps_end = 0.05;
  double eps_decay_episodes = 50.0;
  int probe_size = 64;
  int probe_interval_steps = 100;

  std::size_t threshold() const {
    return static_cast<std::size_t>(threshold_factor) *
           static_cast<std::size_t>(batch_size);
  }
};

// Full experiment configuration; defaults reproduce the evaluated setup. Cell
// capacity is sampled relative to the cell's expected offered load through a
// target-utilization draw, so the sampled deployments always span the light /
// medium / heavy load categories (see README).
struct ScenarioConfig {
  int cells_per_episode = 21;
  double ues_per_cell_mean = 10.0;

  double target_util_min = 0.05;
  double target_util_max = 0.92;
  long long capacity_min = 150;    // bytes per TTI, absolute clamp
  long long capacity_max = 10000;

  std::vector<int> packet_sizes_bytes = {125, 150, 175, 200, 225, 250, 275, 300,
                                         325, 350, 375, 400, 425, 450, 475, 500};
  std::vector<int> interarrival_means_ms = {10, 15, 20};
  std::vector<int> delay_reqs_ms = {50, 75, 100};

  int reset_ms = 500;
  int train_step_ms = 1500;
  int infer_step_ms = 1000;
  int drain_ms = 100;

  int train_episodes = 500;
  int infer_episodes = 10;
  int infer_steps = 10;

  std::vector<int> cycle_set_ms = default_cycle_set();
  std::vector<int> on_duration_set_ms = default_on_duration_set();

  RewardSpec reward;
  AgentConfig agent;
  int sweep_reps = 5;

  int min_deadline_ms() const {
    return *std::min_element(delay_reqs_ms.begin(), delay_reqs_ms.end());
  }
  int max_delay_ms() const {
    return *std::max_element(delay_reqs_ms.begin(), delay_reqs_ms.end());
  }
  TrafficValueSets traffic_sets() const {
    return {packet_sizes_bytes, interarrival_means_ms, delay_reqs_ms};
  }

  void validate() const {
    if (cells_per_episode < 1) throw std::invalid_argument("config: cells_per_episode");
    if (ues_per_cell_mean <= 0.0) throw std::invalid_argument("config: ues_per_cell_mean");
    if (!(target_util_min > 0.0 && target_util_min < target_util_max &&
          target_util_max < 1.0))
      throw std::invalid_argument("config: target utilization range");
    if (capacity_min < 1 || capacity_max < capacity_min)
      throw std::invalid_argument("config: capacity clamp");
    if (packet_sizes_bytes.empty() || interarrival_means_ms.empty() ||
        delay_reqs_ms.empty())
      throw std::invalid_argument("config: empty traffic value set");
    if (reset_ms < 1 || train_step_ms < 1 || infer_step_ms < 1 || drain_ms < 0)
      throw std::invalid_argument("config: durations must be positive");
    if (drain_ms < max_delay_ms())
      throw std::invalid_argument("config: drain shorter than the max delay requirement");
    if (train_episodes < 1 || infer_episodes < 1 || infer_steps < 1)
      throw std::invalid_argument("config: episode counts");
    if (agent.batch_size < 1 || agent.threshold_factor < 1 ||
        agent.buffer_capacity < static_cast<std::size_t>(agent.batch_size))
      throw std::invalid_argument("config: agent batch/buffer sizes");
    if (agent.probe_size < 1 || agent.probe_interval_steps < 1)
      throw std::invalid_argument("config: probe settings");
    if (sweep_reps < 1) throw std::invalid_argument("config: sweep_reps");
    reward.validate();
    // raises if the sets are malformed
    enumerate_actions(min_deadline_ms(), cycle_set_ms, on_duration_set_ms);
  }
};

inline ScenarioConfig default_config() { return {}; }

// ---- JSON (all keys optional; absent keys keep defaults) ----

inline nlohmann::json reward_to_json(const RewardSpec& r) {
  nlohmann::json j;
  j["variant"] = reward_kind_name(r.kind);
  switch (r.kind) {
    case RewardKind::linear: j["c"] = r.c; break;
    case RewardKind::qos_threshold:
      j["a"] = r.a;
      j["b"] = r.b;
      j["y0"] = r.y0;
      break;
    case RewardKind::qos_approx:
      j["y0"] = r.y0;
      j["m"] = r.m;
      j["alpha"] = r.alpha;
      break;
  }
  return j;
}

inline RewardSpec reward_from_json(const nlohmann::json& j) {
  RewardSpec r;
  if (j.contains("variant")) r.kind = reward_kind_from_name(j.at("variant"));
  r.c = j.value("c", r.c);
  r.a = j.value("a", r.a);
  r.b = j.value("b", r.b);
  r.y0 = j.value("y0", r.y0);
  r.m = j.value("m", r.m);
  r.alpha = j.value("alpha", r.alpha);
  r.validate();
  return r;
}

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.cells_per_episode = j.value("cells_per_episode", c.cells_per_episode);
  c.ues_per_cell_mean = j.value("ues_per_cell_mean", c.ues_per_cell_mean);
  c.target_util_min = j.value("target_util_min", c.target_util_min);
  c.target_util_max = j.value("target_util_max", c.target_util_max);
  c.capacity_min = j.value("capacity_min", c.capacity_min);
  c.capacity_max = j.value("capacity_max", c.capacity_max);
  c.packet_sizes_bytes = j.value("packet_sizes_bytes", c.packet_sizes_bytes);
  c.interarrival_means_ms = j.value("interarrival_means_ms", c.interarrival_means_ms);
  c.delay_reqs_ms = j.value("delay_requirements_ms", c.delay_reqs_ms);
  c.reset_ms = j.value("reset_ms", c.reset_ms);
  c.train_step_ms = j.value("train_step_ms", c.train_step_ms);
  c.infer_step_ms = j.value("infer_step_ms", c.infer_step_ms);
  c.drain_ms = j.value("drain_ms", c.drain_ms);
  c.train_episodes = j.value("train_episodes", c.train_episodes);
  c.infer_episodes = j.value("infer_episodes", c.infer_episodes);
  c.infer_steps = j.value("infer_steps", c.infer_steps);
  c.cycle_set_ms = j.value("cycle_set_ms", c.cycle_set_ms);
  c.on_duration_set_ms = j.value("on_duration_set_ms", c.on_duration_set_ms);
  if (j.contains("reward")) c.reward = reward_from_json(j.at("reward"));
  if (j.contains("agent")) {
    const auto& a = j.at("agent");
    c.agent.buffer_capacity = a.value("buffer_capacity", c.agent.buffer_capacity);
    c.agent.batch_size = a.value("batch_size", c.agent.batch_size);
    c.agent.threshold_factor = a.value("threshold_factor", c.agent.threshold_factor);
    c.agent.hidden_sizes = a.value("hidden_sizes", c.agent.hidden_sizes);
    c.agent.learning_rate = a.value("learning_rate", c.agent.learning_rate);
    c.agent.adam_beta1 = a.value("adam_beta1", c.agent.adam_beta1);
    c.agent.adam_beta2 = a.value("adam_beta2", c.agent.adam_beta2);
    c.agent.adam_epsilon = a.value("adam_epsilon", c.agent.adam_epsilon);
    c.agent.smooth_l1_beta = a.value("smooth_l1_beta", c.agent.smooth_l1_beta);
    c.agent.eps_start = a.value("eps_start", c.agent.eps_start);
    c.agent.eps_end = a.value("eps_end", c.agent.eps_end);
    c.agent.eps_decay_episodes = a.value("eps_decay_episodes", c.agent.eps_decay_episodes);
    c.agent.probe_size = a.value("probe_size", c.agent.probe_size);
    c.agent.probe_interval_steps =
        a.value("probe_interval_steps", c.agent.probe_interval_steps);
  }
  c.sweep_reps = j.value("sweep_reps", c.sweep_reps);
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["cells_per_episode"] = c.cells_per_episode;
  j["ues_per_cell_mean"] = c.ues_per_cell_mean;
  j["target_util_min"] = c.target_util_min;
  j["target_util_max"] = c.target_util_max;
  j["capacity_min"] = c.capacity_min;
  j["capacity_max"] = c.capacity_max;
  j["packet_sizes_bytes"] = c.packet_sizes_bytes;
  j["interarrival_means_ms"] = c.interarrival_means_ms;
  j["delay_requirements_ms"] = c.delay_reqs_ms;
  j["reset_ms"] = c.reset_ms;
  j["train_step_ms"] = c.train_step_ms;
  j["infer_step_ms"] = c.infer_step_ms;
  j["drain_ms"] = c.drain_ms;
  j["train_episodes"] = c.train_episodes;
  j["infer_episodes"] = c.infer_episodes;
  j["infer_steps"] = c.infer_steps;
  j["cycle_set_ms"] = c.cycle_set_ms;
  j["on_duration_set_ms"] = c.on_duration_set_ms;
  j["reward"] = reward_to_json(c.reward);
  j["agent"] = {
      {"buffer_capacity", c.agent.buffer_capacity},
      {"batch_size", c.agent.batch_size},
      {"threshold_factor", c.agent.threshold_factor},
      {"hidden_sizes", c.agent.hidden_sizes},
      {"learning_rate", c.agent.learning_rate},
      {"adam_beta1", c.agent.adam_beta1},
      {"adam_beta2", c.agent.adam_beta2},
      {"adam_epsilon", c.agent.adam_epsilon},
      {"smooth_l1_beta", c.agent.smooth_l1_beta},
      {"eps_start", c.agent.eps_start},
      {"eps_end", c.agent.eps_end},
      {"eps_decay_episodes", c.agent.eps_decay_episodes},
      {"probe_size", c.agent.probe_size},
      {"probe_interval_steps", c.agent.probe_interval_steps},
  };
  j["sweep_reps"] = c.sweep_reps;
  return j;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

inline void save_config(const std::string& path, const ScenarioConfig& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json(c).dump(2) << '\n';
}

// ---- deployment sampling ----

struct CellDeployment {
  long long capacity = 0;  // bytes per TTI
  std::vector<UeProfile> profiles;
  double expected_offered = 0.0;  // bytes per ms, from the sampled profiles
  double target_util = 0.0;

  int min_delay_req() const {
    int m = profiles.front().delay_req_ms;
    for (const auto& p : profiles) m = std::min(m, p.delay_req_ms);
    return m;
  }
  CellScenario scenario() const { return {capacity, profiles, min_delay_req()}; }
};

// Draw order (UE count, profiles, target utilization) is fixed; deployment
// streams are shared between agent, baseline and oracle runs.
inline CellDeployment sample_cell_deployment(const ScenarioConfig& cfg,
                                             RngStream& rng) {
  CellDeployment d;
  const int n_ues = std::max(1, rng.poisson(cfg.ues_per_cell_mean));
  d.profiles = sample_ue_profiles(rng, n_ues, cfg.traffic_sets());
  for (const auto& p : d.profiles)
    d.expected_offered +=
        static_cast<double>(p.packet_size_bytes) / p.mean_interarrival_ms;
  d.target_util = rng.uniform(cfg.target_util_min, cfg.target_util_max);
  const double raw = d.expected_offered / d.target_util;
  d.capacity = std::clamp(static_cast<long long>(std::llround(raw)),
                          cfg.capacity_min, cfg.capacity_max);
  return d;
}

inline std::vector<Packet> sample_cell_arrivals(const CellDeployment& d,
                                                int horizon_ms, RngStream& rng,
                                                bool deterministic = false) {
  std::vector<std::vector<Packet>> per_ue;
  per_ue.reserve(d.profiles.size());
  for (const auto& p : d.profiles)
    per_ue.push_back(generate_arrivals(p, horizon_ms, rng, deterministic));
  return merge_arrivals(std::move(per_ue));
}

}  // namespace celldtx
