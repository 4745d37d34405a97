#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "climctl/core/csv.hpp"

namespace climctl::estimation {

struct Observation {
  double time_s = 0.0;
  std::string sensor_id;
  double value = 0.0;
};

/// Columns time_s,sensor_id,value after a '#' units line.
inline std::string observations_csv(const std::vector<Observation>& obs, const std::string& value_unit = "K") {
  std::ostringstream out;
  out << "# units: s,-," << value_unit << "\n";
  out << "time_s,sensor_id,value\n";
  for (const auto& o : obs) out << csv::fmt(o.time_s) << ',' << o.sensor_id << ',' << csv::fmt(o.value) << '\n';
  return out.str();
}

inline std::vector<Observation> read_observations_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const std::size_t ct = t.column("time_s"), cs = t.column("sensor_id"), cv = t.column("value");
  std::vector<Observation> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row[cs].empty())
      throw Error("csv line " + std::to_string(t.line_numbers[r]) + ": empty sensor_id");
    out.push_back({csv::parse_double(row[ct], t.line_numbers[r]), row[cs],
                   csv::parse_double(row[cv], t.line_numbers[r])});
  }
  return out;
}

/// Time-ordered values of one sensor.
inline std::vector<Observation> select_sensor(const std::vector<Observation>& obs, const std::string& id) {
  std::vector<Observation> out;
  for (const auto& o : obs)
    if (o.sensor_id == id) out.push_back(o);
  return out;
}

}  // namespace climctl::estimation
