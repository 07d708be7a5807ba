#pragma once

#include "parastab/integrate.hpp"
#include "parastab/spaces.hpp"

#include <map>
#include <string>
#include <vector>

namespace parastab {

/// One double as text with 17 significant digits ('.' decimal separator).
std::string format_double(double v);

/// Comma-delimited table with a mandatory header row.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Flat "key = value" serialization in the insertion order of the keys.
std::string kv_serialize(const std::vector<std::pair<std::string, std::string>>& items);
std::map<std::string, std::string> kv_parse(const std::string& text);

/// Trajectory dump: t, then per-component H^0, H^alpha, H^xi norms, then the
/// monitor columns (f_norm, margin).
std::string trajectory_csv(const TrajectorySolution& sol, double alpha, double xi);

/// Binary sidecar of the raw coefficients (IEEE-754 doubles, little endian):
/// magic "PSTB", u32 version, u64 n_times/m/K, times, then coefficients in
/// [time][component][mode] order.
void write_sidecar(const std::string& path, const WeightedTrajectory& traj);
WeightedTrajectory read_sidecar(const std::string& path, const Domain1D& domain);

/// Standalone SVG line chart of (x, y) series; optional log10 of y.
std::string svg_line_chart(const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                           const std::string& title, bool log_y);

} // namespace parastab
