#pragma once

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "celldtx/actionspace.hpp"
#include "celldtx/metrics.hpp"

namespace celldtx {

// Lossless, locale-independent double formatting; identical values print
// identically, which the reproducibility checks rely on.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One evaluated (episode, step, cell): the observation the action was chosen
// on, the chosen configuration and the step's metrics.
struct EpisodeRecordRow {
  std::string mode;  // "infer" | "baseline"
  int episode = 0;
  int step = 0;
  int cell = 0;
  long long capacity = 0;
  int action = 0;
  DtxConfig config;
  double x = 0.0;
  double y = 1.0;
  double reward = 0.0;
  double prb_util = 0.0;
  Observation obs;
};

struct ConvergenceRow {
  long long step = 0;
  double mean_max_q = 0.0;
  double mean_loss = 0.0;
};

inline void write_records_csv(std::ostream& os,
                              const std::vector<EpisodeRecordRow>& rows) {
  os << "mode,episode,step,cell,capacity,action,cycle_ms,on_ms,offset_ms,"
        "x,y,reward,prb_util";
  for (const char* name : Observation::feature_names()) os << ',' << name;
  os << '\n';
  for (const auto& r : rows) {
    os << r.mode << ',' << r.episode << ',' << r.step << ',' << r.cell << ','
       << r.capacity << ',' << r.action << ',' << r.config.cycle_ms << ','
       << r.config.on_ms << ',' << r.config.start_offset_ms << ','
       << fmt_double(r.x) << ',' << fmt_double(r.y) << ','
       << fmt_double(r.reward) << ',' << fmt_double(r.prb_util);
    for (double v : r.obs.as_array()) os << ',' << fmt_double(v);
    os << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("bad number in CSV: " + s);
  return v;
}

}  // namespace detail

inline std::vector<EpisodeRecordRow> read_records_csv(std::istream& is) {
  std::vector<EpisodeRecordRow> rows;
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("records CSV: missing header");
  constexpr int kCols = 13 + Observation::kFeatures;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (static_cast<int>(f.size()) != kCols)
      throw std::runtime_error("records CSV: wrong column count: " + line);
    EpisodeRecordRow r;
    r.mode = f[0];
    r.episode = std::stoi(f[1]);
    r.step = std::stoi(f[2]);
    r.cell = std::stoi(f[3]);
    r.capacity = std::stoll(f[4]);
    r.action = std::stoi(f[5]);
    r.config = {std::stoi(f[6]), std::stoi(f[7]), std::stoi(f[8])};
    r.x = detail::to_double(f[9]);
    r.y = detail::to_double(f[10]);
    r.reward = detail::to_double(f[11]);
    r.prb_util = detail::to_double(f[12]);
    std::array<double, Observation::kFeatures> obs{};
    for (int i = 0; i < Observation::kFeatures; ++i)
      obs[static_cast<std::size_t>(i)] = detail::to_double(f[static_cast<std::size_t>(13 + i)]);
    r.obs = Observation::from_array(obs);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& os,
                                  const std::vector<ConvergenceRow>& rows) {
  os << "step,mean_max_q,mean_loss\n";
  for (const auto& r : rows)
    os << r.step << ',' << fmt_double(r.mean_max_q) << ','
       << fmt_double(r.mean_loss) << '\n';
}

inline std::vector<ConvergenceRow> read_convergence_csv(std::istream& is) {
  std::vector<ConvergenceRow> rows;
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("convergence CSV: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("convergence CSV: bad line: " + line);
    rows.push_back({std::stoll(f[0]), detail::to_double(f[1]), detail::to_double(f[2])});
  }
  return rows;
}

}  // namespace celldtx
