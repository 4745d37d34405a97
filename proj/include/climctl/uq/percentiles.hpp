#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "climctl/core/state_space.hpp"

namespace climctl::uq {

/// Per-time percentile bands of an ensemble of scalar trajectories.
struct EnsembleEnvelope {
  std::vector<double> times;
  std::map<double, std::vector<double>> bands;  // level (percent) -> values
  std::size_t n_runs = 0;                       // completed runs
  std::size_t failed_runs = 0;
  std::vector<Vector> terminal_states;          // one per completed run, in run order

  const std::vector<double>& band(double level) const {
    auto it = bands.find(level);
    if (it == bands.end()) throw DomainError("EnsembleEnvelope: no band at level " + std::to_string(level));
    return it->second;
  }
};

/// Linear interpolation between order statistics of `sorted` at position
/// (n - 1) * level / 100.
inline double percentile_sorted(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) throw DomainError("percentile: empty sample");
  if (!(level >= 0.0 && level <= 100.0)) throw DomainError("percentile: level must lie in [0,100]");
  const double pos = static_cast<double>(sorted.size() - 1) * level / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Envelope of state component `component` across trajectories sharing a
/// time grid.
inline EnsembleEnvelope percentiles(const std::vector<Trajectory>& runs, const std::vector<double>& levels,
                                    Eigen::Index component = 0) {
  if (runs.empty()) throw DomainError("percentiles: no trajectories");
  const std::size_t n_t = runs.front().size();
  for (const auto& r : runs)
    if (r.size() != n_t) throw DomainError("percentiles: trajectories differ in length");

  EnsembleEnvelope env;
  env.times = runs.front().times;
  env.n_runs = runs.size();
  for (double lv : levels) env.bands[lv].resize(n_t);
  std::vector<double> column(runs.size());
  for (std::size_t k = 0; k < n_t; ++k) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].states[k](component);
    std::sort(column.begin(), column.end());
    for (double lv : levels) env.bands[lv][k] = percentile_sorted(column, lv);
  }
  for (const auto& r : runs) env.terminal_states.push_back(r.states.back());
  return env;
}

/// Column label for a level: 5 -> "p05", 50 -> "p50", 2.5 -> "p2.5".
inline std::string level_label(double level) {
  char buf[32];
  if (level == std::floor(level)) std::snprintf(buf, sizeof buf, "p%02d", static_cast<int>(level));
  else std::snprintf(buf, sizeof buf, "p%g", level);
  return buf;
}

}  // namespace climctl::uq
