#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "celldtx/actionspace.hpp"
#include "celldtx/metrics.hpp"
#include "celldtx/neural.hpp"
#include "celldtx/rewards.hpp"
#include "celldtx/scenario.hpp"

namespace celldtx {

// Everything inference needs: parameters, input normalizers, the action
// table (so indices never get re-derived) and the reward provenance.
struct TrainedModel {
  Mlp net;
  std::array<double, Observation::kFeatures> normalizers{};
  ActionSpace actions;
  RewardSpec reward;
  std::uint64_t master_seed = 0;
};

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format"] = "celldtx-model";
  j["version"] = kModelFormatVersion;
  j["layer_sizes"] = m.net.sizes;
  j["weights"] = m.net.weights;
  j["biases"] = m.net.biases;
  j["normalizers"] = m.normalizers;
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : m.actions.actions)
    acts.push_back({a.cycle_ms, a.on_ms});
  j["actions"] = acts;
  j["reward"] = reward_to_json(m.reward);
  j["master_seed"] = m.master_seed;
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "celldtx-model")
    throw std::runtime_error("model file: unrecognized format tag");
  if (j.value("version", -1) != kModelFormatVersion)
    throw std::runtime_error("model file: unsupported version");
  TrainedModel m;
  m.net.sizes = j.at("layer_sizes").get<std::vector<int>>();
  m.net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  const auto norm = j.at("normalizers").get<std::vector<double>>();
  if (norm.size() != Observation::kFeatures)
    throw std::runtime_error("model file: bad normalizer count");
  std::copy(norm.begin(), norm.end(), m.normalizers.begin());
  for (const auto& a : j.at("actions")) {
    if (!a.is_array() || a.size() != 2)
      throw std::runtime_error("model file: bad action entry");
    m.actions.actions.push_back({a[0].get<int>(), a[1].get<int>(), 0});
  }
  m.reward = reward_from_json(j.at("reward"));
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (m.net.n_layers() < 1 || m.net.output_size() != m.actions.size())
    throw std::runtime_error("model file: action count disagrees with output layer");
  for (int l = 0; l < m.net.n_layers(); ++l) {
    const auto need = static_cast<std::size_t>(m.net.sizes[l]) *
                      static_cast<std::size_t>(m.net.sizes[l + 1]);
    if (m.net.weights[static_cast<std::size_t>(l)].size() != need ||
        m.net.biases[static_cast<std::size_t>(l)].size() !=
            static_cast<std::size_t>(m.net.sizes[l + 1]))
      throw std::runtime_error("model file: parameter shape mismatch");
  }
  return m;
}

inline void save_model(const std::string& path, const TrainedModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(m).dump() << '\n';
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace celldtx
