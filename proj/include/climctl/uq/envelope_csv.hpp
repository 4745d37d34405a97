#pragma once

#include <sstream>
#include <string>

#include "climctl/core/csv.hpp"
#include "climctl/ebm/ebm0d.hpp"
#include "climctl/uq/percentiles.hpp"

namespace climctl::uq {

/// time_s followed by one column per band. Temperatures are converted from
/// Kelvin to Celsius here when `celsius` is set; the units comment records it.
inline std::string envelope_csv(const EnsembleEnvelope& env, bool celsius = true) {
  std::ostringstream out;
  out << "# units: s";
  for (std::size_t b = 0; b < env.bands.size(); ++b) out << (celsius ? ",degC" : ",K");
  out << "; runs=" << env.n_runs << " failed=" << env.failed_runs << "\n";
  out << "time_s";
  for (const auto& [level, values] : env.bands) out << ',' << level_label(level);
  out << '\n';
  for (std::size_t k = 0; k < env.times.size(); ++k) {
    out << csv::fmt(env.times[k]);
    for (const auto& [level, values] : env.bands)
      out << ',' << csv::fmt(celsius ? ebm::kelvin_to_celsius(values[k]) : values[k]);
    out << '\n';
  }
  return out.str();
}

}  // namespace climctl::uq
