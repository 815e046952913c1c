#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsim/agents.hpp"
#include "mgsim/csv.hpp"
#include "mgsim/environment.hpp"

namespace mgsim {

/// Writes one row per simulated hour: the absolute hour index, every district
/// tracker, then each building's executed actions as "<building>:<action>".
inline void write_trajectory_csv(std::ostream& out, const Environment& env, const EpisodeRecord& rec) {
  std::vector<std::string> header = {"hour_index"};
  for (const auto& n : TrackerSeries::names()) header.push_back(n);
  for (const auto& b : env.buildings()) {
    for (auto a : b.config().actions) header.push_back(b.id() + ":" + std::string(to_string(a)));
  }
  csv::write_header(out, header);

  const auto cols = rec.trackers.columns();
  const std::size_t start = env.period().start;
  for (std::size_t t = 0; t < rec.trackers.size(); ++t) {
    out << start + t;
    for (const auto* c : cols) out << ',' << csv::format_double((*c)[t]);
    if (t < rec.executed_actions.size()) {
      for (const auto& building : rec.executed_actions[t]) {
        for (double v : building) out << ',' << csv::format_double(v);
      }
    }
    out << '\n';
  }
}

/// Reads a single named numeric column from a trajectory CSV.
inline std::vector<double> read_trajectory_column(std::istream& in, const std::string& column = "net_electric_consumption") {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory: empty file");
  line = csv::strip_cr(line);
  std::vector<std::string> header;
  for (auto f : csv::split(line)) header.emplace_back(f);
  std::size_t idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) idx = i;
  }
  if (idx == header.size()) throw std::runtime_error("trajectory: no column named " + column);
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("trajectory: line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                               " fields, header has " + std::to_string(header.size()));
    }
    values.push_back(csv::parse_double(fields[idx]));
  }
  return values;
}

}  // namespace mgsim
