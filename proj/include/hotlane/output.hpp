#pragma once

// Locale-independent CSV and JSON emission for trajectories and summaries.

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "hotlane/analytics.hpp"
#include "hotlane/errors.hpp"
#include "hotlane/sim_engine.hpp"

namespace hotlane {

inline constexpr std::array<std::string_view, 13> kTrajectoryColumns = {
    "t", "lambda1", "lambda2", "zeta", "w", "pi", "u", "g1", "g2", "q1", "q2", "q3", "eta"};

inline constexpr int kCsvSignificantDigits = 9;

/// %.9g via to_chars, which never consults the locale.
inline void append_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general,
                               kCsvSignificantDigits);
  out.append(buf.data(), r.ptr);
}

inline void write_csv_row(std::ostream& os, std::span<const double> values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line.push_back(',');
    append_number(line, values[i]);
  }
  line.push_back('\n');
  os << line;
}

inline void write_csv_header(std::ostream& os, std::span<const std::string_view> cols) {
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line.push_back(',');
    line.append(cols[i]);
  }
  line.push_back('\n');
  os << line;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  write_csv_header(os, kTrajectoryColumns);
  for (const auto& s : traj.states) {
    const std::array<double, 13> row = {s.t,  s.lambda1, s.lambda2, s.zeta, s.w,  s.pi, s.u,
                                        s.g1, s.g2,      s.q1,      s.q2,   s.q3, s.eta};
    write_csv_row(os, row);
  }
}

inline std::vector<SystemState> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("trajectory CSV: missing header");
  std::string expected;
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) {
    if (i) expected.push_back(',');
    expected.append(kTrajectoryColumns[i]);
  }
  if (line != expected) throw IoError("trajectory CSV: unexpected header '" + line + "'");

  std::vector<SystemState> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::array<double, 13> v{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto r = std::from_chars(p, end, v[i]);
      if (r.ec != std::errc{}) throw IoError("trajectory CSV: bad number on line " + std::to_string(lineno));
      p = r.ptr;
      if (i + 1 < v.size()) {
        if (p == end || *p != ',') throw IoError("trajectory CSV: short row on line " + std::to_string(lineno));
        ++p;
      }
    }
    if (p != end) throw IoError("trajectory CSV: trailing data on line " + std::to_string(lineno));
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12]});
  }
  return out;
}

/// Non-finite values become null.
inline nlohmann::json json_number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const SummaryMetrics& m) {
  return {
      {"avg_g1", json_number(m.avg_g1)},
      {"final_u", json_number(m.final_u)},
      {"final_pi", json_number(m.final_pi)},
      {"max_lambda1", json_number(m.max_lambda1)},
      {"final_lambda1", json_number(m.final_lambda1)},
      {"time_to_zero_queue",
       m.time_to_zero_queue ? json_number(*m.time_to_zero_queue) : nlohmann::json(nullptr)},
      {"pi_rmse_tail", json_number(m.pi_rmse_tail)},
      {"negative_price_steps", m.negative_price_steps},
  };
}

inline nlohmann::json to_json(const PatternReport& r) {
  return {
      {"pattern", std::string(to_string(r.pattern))},
      {"ratio_estimate", json_number(r.ratio_estimate)},
      {"fit_r2_gaussian", json_number(r.fit_r2_gaussian)},
      {"fit_r2_exponential", json_number(r.fit_r2_exponential)},
      {"window_start", json_number(r.window_start)},
      {"window_end", json_number(r.window_end)},
  };
}

}  // namespace hotlane
