#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "celldtx/agent.hpp"
#include "celldtx/cellsim.hpp"
#include "celldtx/metrics.hpp"
#include "celldtx/model_io.hpp"
#include "celldtx/records.hpp"
#include "celldtx/rewards.hpp"
#include "celldtx/rng.hpp"
#include "celldtx/scenario.hpp"

namespace celldtx {

struct CellEpisodeOutcome {
  CellDeployment deployment;
  std::vector<Observation> observations;  // [0] from the reset, [k+1] from step k
  std::vector<int> actions;               // per step
  std::vector<DtxConfig> configs;         // per step, offsets included
  std::vector<PeriodMetrics> metrics;     // per step
};

// One cell through a full episode: always-active reset, then n_steps RL
// windows whose configuration comes from `choose(step, observation)`, then a
// drain that resolves the tail packets. The queue persists across windows;
// each window's metrics cover only the packets that arrived in it and only
// its own TTIs.
template <typename ChooseFn>
inline CellEpisodeOutcome run_cell_episode(const ScenarioConfig& cfg,
                                           const CellDeployment& dep,
                                           std::vector<Packet> arrivals,
                                           int n_steps, int step_ms,
                                           ChooseFn&& choose) {
  const int traffic_end = cfg.reset_ms + n_steps * step_ms;
  const int horizon = traffic_end + std::max(cfg.drain_ms, 1);
  CellEngine engine(dep.scenario(), std::move(arrivals), horizon);
  CellEpisodeOutcome out;
  out.deployment = dep;
  engine.set_config({1, 1, 0});
  engine.advance_to(cfg.reset_ms);
  out.observations.push_back(
      extract_observation(engine.window_result(0, cfg.reset_ms)));
  for (int k = 0; k < n_steps; ++k) {
    const auto [action, config] = choose(k, out.observations.back());
    validate_config(config);
    engine.set_config(config);
    const int t0 = cfg.reset_ms + k * step_ms;
    engine.advance_to(t0 + step_ms);
    out.observations.push_back(
        extract_observation(engine.window_result(t0, t0 + step_ms)));
    out.actions.push_back(action);
    out.configs.push_back(config);
  }
  engine.run_to_end();
  for (int k = 0; k < n_steps; ++k) {
    const int t0 = cfg.reset_ms + k * step_ms;
    out.metrics.push_back(period_metrics(engine.window_result(t0, t0 + step_ms)));
  }
  return out;
}

struct TrainResult {
  TrainedModel model;
  std::vector<ConvergenceRow> log;
  long long total_steps = 0;
  long long total_experiences = 0;
  int normalizer_episode = -1;  // episode whose appends crossed the threshold
  std::size_t final_buffer_size = 0;
};

// Contextual-bandit DQN training: per episode a fresh 21-cell deployment, one
// reset + one RL step per cell, eps-greedy actions (start offset 0), one
// experience per cell, and as many optimization steps as experiences once the
// buffer passes the normalizer threshold.
inline TrainResult train_agent(const ScenarioConfig& cfg, std::uint64_t seed,
                               std::ostream* progress = nullptr) {
  cfg.validate();
  ActionSpace actions =
      enumerate_actions(cfg.min_deadline_ms(), cfg.cycle_set_ms, cfg.on_duration_set_ms);
  std::vector<int> sizes;
  sizes.push_back(Observation::kFeatures);
  for (int h : cfg.agent.hidden_sizes) sizes.push_back(h);
  sizes.push_back(actions.size());

  RngStream init_rng = derive_stream(seed, StreamPurpose::net_init);
  Mlp net = init_mlp(sizes, init_rng);
  AdamState adam = make_adam_state(net, cfg.agent.learning_rate, cfg.agent.adam_beta1,
                                   cfg.agent.adam_beta2, cfg.agent.adam_epsilon);
  Gradients scratch = zero_gradients(net);
  ReplayBuffer buffer(cfg.agent.buffer_capacity);
  const std::size_t threshold = cfg.agent.threshold();
  const EpsilonSchedule schedule{cfg.agent.eps_start, cfg.agent.eps_end,
                                 cfg.agent.eps_decay_episodes};
  RngStream trainer_rng = derive_stream(seed, StreamPurpose::trainer);

  std::array<double, Observation::kFeatures> norms{};
  norms.fill(1.0);
  bool normalizers_fitted = false;
  std::vector<std::array<double, Observation::kFeatures>> probe_states;

  long long global_step = 0;
  long long result_total_experiences = 0;
  int normalizer_episode = -1;
  double loss_accum = 0.0;
  long long loss_count = 0;
  std::vector<ConvergenceRow> log;

  for (int e = 0; e < cfg.train_episodes; ++e) {
    const double eps = schedule.value(e);
    std::vector<Experience> collected;
    collected.reserve(static_cast<std::size_t>(cfg.cells_per_episode));
    for (int cell = 0; cell < cfg.cells_per_episode; ++cell) {
      RngStream dep_rng = derive_stream(seed, StreamPurpose::train_deployment,
                                        static_cast<std::uint64_t>(e),
                                        static_cast<std::uint64_t>(cell));
      const CellDeployment dep = sample_cell_deployment(cfg, dep_rng);
      RngStream traffic_rng = derive_stream(seed, StreamPurpose::train_traffic,
                                            static_cast<std::uint64_t>(e),
                                            static_cast<std::uint64_t>(cell));
      std::vector<Packet> arrivals = sample_cell_arrivals(
          dep, cfg.reset_ms + cfg.train_step_ms, traffic_rng);
      RngStream policy_rng = derive_stream(seed, StreamPurpose::train_policy,
                                           static_cast<std::uint64_t>(e),
                                           static_cast<std::uint64_t>(cell));
      auto choose = [&](int, const Observation& obs) -> std::pair<int, DtxConfig> {
        // before the normalizers exist the network inputs are undefined, so
        // exploration is forced
        const int a = normalizers_fitted
                          ? select_action(net, norms, obs, eps, policy_rng)
                          : static_cast<int>(policy_rng.uniform_int(
                                static_cast<std::uint64_t>(actions.size())));
        return {a, actions.at(a)};
      };
      CellEpisodeOutcome oc = run_cell_episode(cfg, dep, std::move(arrivals), 1,
                                               cfg.train_step_ms, choose);
      Experience ex;
      ex.state = oc.observations[0].as_array();
      ex.action = oc.actions[0];
      ex.reward = cfg.reward.evaluate(oc.metrics[0].x, oc.metrics[0].y);
      collected.push_back(ex);
    }
    for (const auto& ex : collected) buffer.push(ex);
    result_total_experiences += static_cast<long long>(collected.size());

    if (!normalizers_fitted && buffer.size() >= threshold) {
      norms = fit_normalizers(buffer, threshold);
      normalizers_fitted = true;
      normalizer_episode = e;
      const std::size_t n_probe =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.agent.probe_size),
                                buffer.size());
      probe_states.reserve(n_probe);
      for (std::size_t i = 0; i < n_probe; ++i)
        probe_states.push_back(buffer[i].state);
    }
    if (normalizers_fitted) {
      for (std::size_t i = 0; i < collected.size(); ++i) {
        const double loss =
            train_step(net, adam, buffer, norms, cfg.agent.batch_size,
                       cfg.agent.smooth_l1_beta, trainer_rng, scratch);
        ++global_step;
        loss_accum += loss;
        ++loss_count;
        if (global_step % cfg.agent.probe_interval_steps == 0) {
          log.push_back({global_step, probe_q(net, norms, probe_states),
                         loss_accum / static_cast<double>(loss_count)});
          loss_accum = 0.0;
          loss_count = 0;
        }
      }
    }
    if (progress && (e + 1) % 50 == 0)
      *progress << "episode " << (e + 1) << "/" << cfg.train_episodes
                << " eps=" << eps << " buffer=" << buffer.size()
                << " steps=" << global_step << '\n';
  }

  TrainResult result;
  result.model =
      TrainedModel{std::move(net), norms, std::move(actions), cfg.reward, seed};
  result.log = std::move(log);
  result.total_steps = global_step;
  result.total_experiences = result_total_experiences;
  result.normalizer_episode = normalizer_episode;
  result.final_buffer_size = buffer.size();
  return result;
}

namespace detail {

inline std::vector<EpisodeRecordRow> run_eval_episodes(const TrainedModel* model,
                                                       const ScenarioConfig& cfg,
                                                       std::uint64_t seed,
                                                       int n_episodes) {
  cfg.validate();
  const bool baseline = model == nullptr;
  ActionSpace local_actions;
  const ActionSpace* actions = nullptr;
  if (baseline) {
    local_actions = enumerate_actions(cfg.min_deadline_ms(), cfg.cycle_set_ms,
                                      cfg.on_duration_set_ms);
    actions = &local_actions;
  } else {
    actions = &model->actions;
    if (model->net.output_size() != actions->size())
      throw std::invalid_argument("run_eval_episodes: model action table broken");
  }
  const RewardSpec& reward = baseline ? cfg.reward : model->reward;
  const int always_active = actions->always_active_index();

  std::vector<EpisodeRecordRow> rows;
  rows.reserve(static_cast<std::size_t>(n_episodes) * cfg.cells_per_episode *
               cfg.infer_steps);
  for (int e = 0; e < n_episodes; ++e) {
    for (int cell = 0; cell < cfg.cells_per_episode; ++cell) {
      RngStream dep_rng = derive_stream(seed, StreamPurpose::eval_deployment,
                                        static_cast<std::uint64_t>(e),
                                        static_cast<std::uint64_t>(cell));
      const CellDeployment dep = sample_cell_deployment(cfg, dep_rng);
      RngStream traffic_rng = derive_stream(seed, StreamPurpose::eval_traffic,
                                            static_cast<std::uint64_t>(e),
                                            static_cast<std::uint64_t>(cell));
      std::vector<Packet> arrivals = sample_cell_arrivals(
          dep, cfg.reset_ms + cfg.infer_steps * cfg.infer_step_ms, traffic_rng);
      RngStream offset_rng = derive_stream(seed, StreamPurpose::eval_offset,
                                           static_cast<std::uint64_t>(e),
                                           static_cast<std::uint64_t>(cell));
      auto choose = [&](int, const Observation& obs) -> std::pair<int, DtxConfig> {
        if (baseline) return {always_active, DtxConfig{1, 1, 0}};
        const int a = argmax_action(model->net, model->normalizers, obs);
        DtxConfig c = model->actions.at(a);
        if (c.cycle_ms > 1)
          c.start_offset_ms =
              static_cast<int>(offset_rng.uniform_int(static_cast<std::uint64_t>(c.cycle_ms)));
        return {a, c};
      };
      CellEpisodeOutcome oc = run_cell_episode(cfg, dep, std::move(arrivals),
                                               cfg.infer_steps, cfg.infer_step_ms,
                                               choose);
      for (int k = 0; k < cfg.infer_steps; ++k) {
        EpisodeRecordRow r;
        r.mode = baseline ? "baseline" : "infer";
        r.episode = e;
        r.step = k;
        r.cell = cell;
        r.capacity = dep.capacity;
        r.action = oc.actions[static_cast<std::size_t>(k)];
        r.config = oc.configs[static_cast<std::size_t>(k)];
        r.x = oc.metrics[static_cast<std::size_t>(k)].x;
        r.y = oc.metrics[static_cast<std::size_t>(k)].y;
        r.reward = reward.evaluate(r.x, r.y);
        r.prb_util = oc.metrics[static_cast<std::size_t>(k)].prb_util;
        r.obs = oc.observations[static_cast<std::size_t>(k)];
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

}  // namespace detail

// Pure-argmax inference with random start offsets; 10 RL steps per episode.
inline std::vector<EpisodeRecordRow> run_inference(const TrainedModel& model,
                                                   const ScenarioConfig& cfg,
                                                   std::uint64_t seed,
                                                   int n_episodes) {
  return detail::run_eval_episodes(&model, cfg, seed, n_episodes);
}

// Same episodes (same seeds, hence byte-identical traffic) with DTX disabled.
inline std::vector<EpisodeRecordRow> run_baseline(const ScenarioConfig& cfg,
                                                  std::uint64_t seed,
                                                  int n_episodes) {
  return detail::run_eval_episodes(nullptr, cfg, seed, n_episodes);
}

struct SweepRow {
  int action = 0;
  DtxConfig config;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double mean_reward = 0.0;
};

struct SweepResult {
  int scenario_id = 0;
  CellDeployment deployment;
  std::vector<SweepRow> rows;
  int best_action = 0;
  Observation probe_obs;   // reset observation of repetition 0
  int agent_action = -1;   // only when a model is supplied
  double regret = 0.0;     // oracle best mean reward minus the agent pick's
};

// Brute-force oracle: every action simulated on the same traffic repetitions
// (common random numbers), training-shaped windows, start offset 0. With
// deterministic traffic every repetition is the same fixed trace.
inline SweepResult oracle_sweep(const ScenarioConfig& cfg, std::uint64_t seed,
                                int scenario_id, int reps,
                                const TrainedModel* model = nullptr,
                                bool deterministic_traffic = false) {
  cfg.validate();
  if (reps < 1) throw std::invalid_argument("oracle_sweep: reps must be >= 1");
  ActionSpace local_actions;
  const ActionSpace* actions = nullptr;
  if (model) {
    actions = &model->actions;
  } else {
    local_actions = enumerate_actions(cfg.min_deadline_ms(), cfg.cycle_set_ms,
                                      cfg.on_duration_set_ms);
    actions = &local_actions;
  }
  const RewardSpec& reward = model ? model->reward : cfg.reward;

  SweepResult result;
  result.scenario_id = scenario_id;
  RngStream dep_rng = derive_stream(seed, StreamPurpose::probe_deployment,
                                    static_cast<std::uint64_t>(scenario_id));
  result.deployment = sample_cell_deployment(cfg, dep_rng);

  std::vector<std::vector<Packet>> rep_arrivals;
  rep_arrivals.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    RngStream traffic_rng = derive_stream(seed, StreamPurpose::probe_traffic,
                                          static_cast<std::uint64_t>(scenario_id),
                                          static_cast<std::uint64_t>(r));
    rep_arrivals.push_back(sample_cell_arrivals(result.deployment,
                                                cfg.reset_ms + cfg.train_step_ms,
                                                traffic_rng, deterministic_traffic));
  }

  for (int a = 0; a < actions->size(); ++a) {
    SweepRow row;
    row.action = a;
    row.config = actions->at(a);
    for (int r = 0; r < reps; ++r) {
      auto choose = [&](int, const Observation&) -> std::pair<int, DtxConfig> {
        return {a, actions->at(a)};
      };
      CellEpisodeOutcome oc =
          run_cell_episode(cfg, result.deployment, rep_arrivals[static_cast<std::size_t>(r)],
                           1, cfg.train_step_ms, choose);
      row.mean_x += oc.metrics[0].x;
      row.mean_y += oc.metrics[0].y;
      row.mean_reward += reward.evaluate(oc.metrics[0].x, oc.metrics[0].y);
      if (a == 0 && r == 0) result.probe_obs = oc.observations[0];
    }
    row.mean_x /= reps;
    row.mean_y /= reps;
    row.mean_reward /= reps;
    result.rows.push_back(row);
  }

  result.best_action = 0;
  for (int a = 1; a < actions->size(); ++a)
    if (result.rows[static_cast<std::size_t>(a)].mean_reward >
        result.rows[static_cast<std::size_t>(result.best_action)].mean_reward)
      result.best_action = a;
  if (model) {
    result.agent_action =
        argmax_action(model->net, model->normalizers, result.probe_obs);
    result.regret =
        result.rows[static_cast<std::size_t>(result.best_action)].mean_reward -
        result.rows[static_cast<std::size_t>(result.agent_action)].mean_reward;
  }
  return result;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "scenario_id,action,cycle_ms,on_ms,mean_x,mean_y,mean_reward,is_best,is_agent_choice\n";
  for (const auto& row : r.rows)
    os << r.scenario_id << ',' << row.action << ',' << row.config.cycle_ms << ','
       << row.config.on_ms << ',' << fmt_double(row.mean_x) << ','
       << fmt_double(row.mean_y) << ',' << fmt_double(row.mean_reward) << ','
       << (row.action == r.best_action ? 1 : 0) << ','
       << (row.action == r.agent_action ? 1 : 0) << '\n';
}

// ---- load categorization and the report ----

struct CategoryStats {
  std::string name;
  int cells = 0;
  double mean_x_agent = 0.0;
  double mean_x_baseline = 0.0;
  double energy_saving_pct = 0.0;
  double mean_y_agent = 0.0;
  double mean_y_baseline = 0.0;
  double rate_loss_pct = 0.0;
};

struct LoadReport {
  std::array<CategoryStats, 3> categories;  // light, medium, heavy
};

// Cells are binned by their baseline PRB utilization: light [0, 0.4),
// medium [0.4, 0.8), heavy [0.8, 1]. Savings and losses compare matched-seed
// (episode, cell) pairs.
inline LoadReport categorize_and_report(
    const std::vector<EpisodeRecordRow>& agent_rows,
    const std::vector<EpisodeRecordRow>& baseline_rows) {
  struct CellAcc {
    double x = 0.0, y = 0.0, util = 0.0;
    int steps = 0;
  };
  std::map<std::pair<int, int>, CellAcc> agent_cells, baseline_cells;
  for (const auto& r : agent_rows) {
    auto& a = agent_cells[{r.episode, r.cell}];
    a.x += r.x;
    a.y += r.y;
    a.util += r.prb_util;
    ++a.steps;
  }
  for (const auto& r : baseline_rows) {
    auto& a = baseline_cells[{r.episode, r.cell}];
    a.x += r.x;
    a.y += r.y;
    a.util += r.prb_util;
    ++a.steps;
  }
  if (agent_cells.size() != baseline_cells.size())
    throw std::invalid_argument("report: agent and baseline cell sets differ");

  LoadReport report;
  report.categories[0].name = "light";
  report.categories[1].name = "medium";
  report.categories[2].name = "heavy";
  std::array<double, 3> xa{}, xb{}, ya{}, yb{};
  for (const auto& [key, base] : baseline_cells) {
    const auto it = agent_cells.find(key);
    if (it == agent_cells.end())
      throw std::invalid_argument("report: agent rows missing a baseline cell");
    const CellAcc& agent = it->second;
    const double util = base.util / base.steps;
    const int cat = util < 0.4 ? 0 : (util < 0.8 ? 1 : 2);
    auto& c = report.categories[static_cast<std::size_t>(cat)];
    ++c.cells;
    xa[static_cast<std::size_t>(cat)] += agent.x / agent.steps;
    ya[static_cast<std::size_t>(cat)] += agent.y / agent.steps;
    xb[static_cast<std::size_t>(cat)] += base.x / base.steps;
    yb[static_cast<std::size_t>(cat)] += base.y / base.steps;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    auto& c = report.categories[i];
    if (c.cells == 0) continue;  // empty category is reported empty, not an error
    c.mean_x_agent = xa[i] / c.cells;
    c.mean_x_baseline = xb[i] / c.cells;
    c.mean_y_agent = ya[i] / c.cells;
    c.mean_y_baseline = yb[i] / c.cells;
    c.energy_saving_pct = 100.0 * (1.0 - c.mean_x_agent / c.mean_x_baseline);
    c.rate_loss_pct = 100.0 * (1.0 - c.mean_y_agent / c.mean_y_baseline);
  }
  return report;
}

inline void write_report_csv(std::ostream& os, const LoadReport& report) {
  os << "category,cells,mean_power_agent,mean_power_baseline,energy_saving_pct,"
        "mean_y_agent,mean_y_baseline,rate_loss_pct\n";
  for (const auto& c : report.categories)
    os << c.name << ',' << c.cells << ',' << fmt_double(c.mean_x_agent * kMaxDlPower)
       << ',' << fmt_double(c.mean_x_baseline * kMaxDlPower) << ','
       << fmt_double(c.energy_saving_pct) << ',' << fmt_double(c.mean_y_agent)
       << ',' << fmt_double(c.mean_y_baseline) << ',' << fmt_double(c.rate_loss_pct)
       << '\n';
}

inline std::string format_report_table(const LoadReport& report) {
  char buf[160];
  std::string out;
  out += "category  cells  power(agent)  power(base)  saving%   y(agent)  y(base)   loss%\n";
  for (const auto& c : report.categories) {
    std::snprintf(buf, sizeof(buf),
                  "%-8s %6d %13.2f %12.2f %8.2f %10.4f %8.4f %7.2f\n",
                  c.name.c_str(), c.cells, c.mean_x_agent * kMaxDlPower,
                  c.mean_x_baseline * kMaxDlPower, c.energy_saving_pct,
                  c.mean_y_agent, c.mean_y_baseline, c.rate_loss_pct);
    out += buf;
  }
  return out;
}

}  // namespace celldtx
