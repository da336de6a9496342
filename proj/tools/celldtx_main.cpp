#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "celldtx/harness.hpp"
#include "celldtx/model_io.hpp"
#include "celldtx/scenario.hpp"

namespace {

celldtx::ScenarioConfig load_or_default(const std::string& path) {
  if (path.empty()) return celldtx::default_config();
  return celldtx::load_config(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell DTX/DRX energy-saving simulator and contextual-bandit agent"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "scenario config JSON (defaults if omitted)");
  app.add_option("--seed", seed, "master seed; all randomness derives from it");

  auto* train = app.add_subcommand("train", "train an agent, write model + convergence CSV");
  std::string model_out, convergence_out, reward_override;
  int episodes_override = -1;
  train->add_option("--model-out", model_out, "output model file")->required();
  train->add_option("--convergence-out", convergence_out, "output convergence CSV");
  train->add_option("--reward", reward_override,
                    "override reward variant: linear | qos_threshold | qos_approx");
  train->add_option("--episodes", episodes_override, "override training episode count");

  auto* infer = app.add_subcommand("infer", "run inference episodes, write records CSV");
  std::string model_in, records_out;
  int eval_episodes = -1;
  infer->add_option("--model", model_in, "trained model file")->required();
  infer->add_option("--out", records_out, "output records CSV")->required();
  infer->add_option("--episodes", eval_episodes, "override inference episode count");

  auto* baseline = app.add_subcommand("baseline", "run matched always-active episodes");
  std::string baseline_out, trace_out;
  int baseline_episodes = -1;
  baseline->add_option("--out", baseline_out, "output records CSV")->required();
  baseline->add_option("--episodes", baseline_episodes, "override episode count");
  baseline->add_option("--trace-out", trace_out, "also dump the traffic traces for replay");

  auto* sweep = app.add_subcommand("sweep", "brute-force oracle over the action space");
  std::string sweep_out, sweep_model;
  int scenario_id = 0, reps = -1;
  sweep->add_option("--scenario-id", scenario_id, "probe scenario index")->required();
  sweep->add_option("--out", sweep_out, "output table CSV")->required();
  sweep->add_option("--reps", reps, "traffic repetitions per action");
  sweep->add_option("--model", sweep_model, "score this model's pick against the oracle");

  auto* report = app.add_subcommand("report", "per-load-category savings vs baseline");
  std::string report_agent, report_baseline, report_out;
  report->add_option("--agent", report_agent, "agent records CSV")->required();
  report->add_option("--baseline", report_baseline, "baseline records CSV")->required();
  report->add_option("--out", report_out, "output report CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    celldtx::ScenarioConfig cfg = load_or_default(config_path);

    if (train->parsed()) {
      if (!reward_override.empty()) {
        cfg.reward.kind = celldtx::reward_kind_from_name(reward_override);
        cfg.reward.validate();
      }
      if (episodes_override > 0) cfg.train_episodes = episodes_override;
      const celldtx::TrainResult result = celldtx::train_agent(cfg, seed, &std::cerr);
      celldtx::save_model(model_out, result.model);
      if (!convergence_out.empty()) {
        auto out = open_out(convergence_out);
        celldtx::write_convergence_csv(out, result.log);
      }
      std::cout << "trained " << cfg.train_episodes << " episodes, "
                << result.model.actions.size() << " actions, model -> " << model_out
                << '\n';
    } else if (infer->parsed()) {
      const celldtx::TrainedModel model = celldtx::load_model(model_in);
      const int n = eval_episodes > 0 ? eval_episodes : cfg.infer_episodes;
      const auto rows = celldtx::run_inference(model, cfg, seed, n);
      auto out = open_out(records_out);
      celldtx::write_records_csv(out, rows);
      std::cout << "inference: " << n << " episodes, " << rows.size()
                << " rows -> " << records_out << '\n';
    } else if (baseline->parsed()) {
      const int n = baseline_episodes > 0 ? baseline_episodes : cfg.infer_episodes;
      const auto rows = celldtx::run_baseline(cfg, seed, n);
      auto out = open_out(baseline_out);
      celldtx::write_records_csv(out, rows);
      if (!trace_out.empty()) {
        auto tout = open_out(trace_out);
        for (int e = 0; e < n; ++e) {
          for (int cell = 0; cell < cfg.cells_per_episode; ++cell) {
            auto dep_rng = celldtx::derive_stream(
                seed, celldtx::StreamPurpose::eval_deployment,
                static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(cell));
            const auto dep = celldtx::sample_cell_deployment(cfg, dep_rng);
            auto traffic_rng = celldtx::derive_stream(
                seed, celldtx::StreamPurpose::eval_traffic,
                static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(cell));
            const auto arrivals = celldtx::sample_cell_arrivals(
                dep, cfg.reset_ms + cfg.infer_steps * cfg.infer_step_ms, traffic_rng);
            tout << "# episode " << e << " cell " << cell << " capacity "
                 << dep.capacity << '\n';
            celldtx::write_trace(tout, arrivals);
          }
        }
      }
      std::cout << "baseline: " << n << " episodes, " << rows.size() << " rows -> "
                << baseline_out << '\n';
    } else if (sweep->parsed()) {
      const int r = reps > 0 ? reps : cfg.sweep_reps;
      celldtx::TrainedModel model;
      const celldtx::TrainedModel* model_ptr = nullptr;
      if (!sweep_model.empty()) {
        model = celldtx::load_model(sweep_model);
        model_ptr = &model;
      }
      const auto result = celldtx::oracle_sweep(cfg, seed, scenario_id, r, model_ptr);
      auto out = open_out(sweep_out);
      celldtx::write_sweep_csv(out, result);
      const auto& best = result.rows[static_cast<std::size_t>(result.best_action)];
      std::cout << "sweep scenario " << scenario_id << ": best action ("
                << best.config.cycle_ms << ',' << best.config.on_ms
                << ") mean reward " << best.mean_reward;
      if (model_ptr)
        std::cout << "; agent picked action " << result.agent_action << ", regret "
                  << result.regret;
      std::cout << '\n';
    } else if (report->parsed()) {
      std::ifstream agent_in(report_agent), baseline_in(report_baseline);
      if (!agent_in) throw std::runtime_error("cannot open: " + report_agent);
      if (!baseline_in) throw std::runtime_error("cannot open: " + report_baseline);
      const auto agent_rows = celldtx::read_records_csv(agent_in);
      const auto baseline_rows = celldtx::read_records_csv(baseline_in);
      const auto rep = celldtx::categorize_and_report(agent_rows, baseline_rows);
      if (!report_out.empty()) {
        auto out = open_out(report_out);
        celldtx::write_report_csv(out, rep);
      }
      std::cout << celldtx::format_report_table(rep);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
