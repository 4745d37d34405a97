#pragma once

#include <sstream>
#include <string>

#include "climctl/atmosphere/grid.hpp"
#include "climctl/core/csv.hpp"

namespace climctl::atmos {

/// Grid snapshot as CSV: a '#' units line, then the header
/// i,j,k,vx,vy,vz,T,rho and one row per cell in storage order.
inline std::string snapshot_csv(const AtmosState& s, const AtmosGrid& g) {
  std::ostringstream out;
  out << "# units: -,-,-,m/s,m/s,m/s,K,kg/m^3\n";
  out << "i,j,k,vx,vy,vz,T,rho\n";
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        const auto c = static_cast<Eigen::Index>(g.index(i, j, k));
        out << i << ',' << j << ',' << k << ',' << csv::fmt(s.vx(c)) << ',' << csv::fmt(s.vy(c))
            << ',' << csv::fmt(s.vz(c)) << ',' << csv::fmt(s.T(c)) << ',' << csv::fmt(s.rho(c))
            << '\n';
      }
  return out.str();
}

inline AtmosState read_snapshot_csv(std::istream& in, const AtmosGrid& g) {
  const csv::Table t = csv::read_table(in);
  if (t.rows.size() != g.cells())
    throw Error("snapshot: expected " + std::to_string(g.cells()) + " rows, got " +
                std::to_string(t.rows.size()));
  AtmosState s = AtmosState::uniform(g, 1.0, 1.0);
  const std::size_t ci = t.column("i"), cj = t.column("j"), ck = t.column("k");
  const std::size_t cols[] = {t.column("vx"), t.column("vy"), t.column("vz"), t.column("T"),
                              t.column("rho")};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto i = static_cast<std::size_t>(csv::parse_double(row[ci], t.line_numbers[r]));
    const auto j = static_cast<std::size_t>(csv::parse_double(row[cj], t.line_numbers[r]));
    const auto k = static_cast<std::size_t>(csv::parse_double(row[ck], t.line_numbers[r]));
    if (i >= g.nx || j >= g.ny || k >= g.nz)
      throw Error("snapshot line " + std::to_string(t.line_numbers[r]) + ": index out of grid");
    const auto c = static_cast<Eigen::Index>(g.index(i, j, k));
    Vector* fields[] = {&s.vx, &s.vy, &s.vz, &s.T, &s.rho};
    for (int f = 0; f < 5; ++f) (*fields[f])(c) = csv::parse_double(row[cols[f]], t.line_numbers[r]);
  }
  return s;
}

}  // namespace climctl::atmos
