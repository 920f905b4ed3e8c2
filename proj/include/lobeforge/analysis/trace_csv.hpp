#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lobeforge/core/error.hpp"

namespace lobeforge {

// One sample of a recorded indentation trace.
struct TracePoint {
  double time_s = 0.0;
  double stroke_mm = 0.0;
  double force_n = 0.0;
};

// One scalar outcome of a characterization run, keyed by the design, the
// loading direction, and the metric name.
struct Observation {
  std::string actuator;
  std::string direction;
  std::string metric;
  double value = 0.0;
};

namespace detail {

// 17 significant digits reproduce any double exactly on read-back.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_number(const std::string& field, const std::string& context) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  require(ec == std::errc() && ptr == end, ErrorCode::FormatError,
          "not a number in " + context + ": '" + field + "'");
  return value;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace detail

inline void write_force_trace(const std::string& path, const std::vector<TracePoint>& trace) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << "time_s,stroke_mm,force_n\n";
  for (const auto& p : trace)
    out << detail::format_number(p.time_s) << ',' << detail::format_number(p.stroke_mm)
        << ',' << detail::format_number(p.force_n) << '\n';
  require(out.good(), ErrorCode::IoFailure, "write failed for " + path);
}

inline std::vector<TracePoint> read_force_trace(const std::string& path) {
  std::vector<std::string> lines = detail::read_lines(path);
  require(!lines.empty(), ErrorCode::EmptyData, path + " is empty");
  require(lines[0] == "time_s,stroke_mm,force_n", ErrorCode::FormatError,
          path + " has an unexpected header: '" + lines[0] + "'");
  require(lines.size() > 1, ErrorCode::EmptyData, path + " has no samples");
  std::vector<TracePoint> trace;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = detail::split_fields(lines[i]);
    require(fields.size() == 3, ErrorCode::FormatError,
            path + " row " + std::to_string(i) + " does not have 3 fields");
    std::string context = path + " row " + std::to_string(i);
    TracePoint p;
    p.time_s = detail::parse_number(fields[0], context);
    p.stroke_mm = detail::parse_number(fields[1], context);
    p.force_n = detail::parse_number(fields[2], context);
    trace.push_back(p);
  }
  return trace;
}

inline void write_observations(const std::string& path,
                               const std::vector<Observation>& observations) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoFailure, "cannot write " + path);
  out << "actuator,direction,metric,value\n";
  for (const auto& o : observations)
    out << o.actuator << ',' << o.direction << ',' << o.metric << ','
        << detail::format_number(o.value) << '\n';
  require(out.good(), ErrorCode::IoFailure, "write failed for " + path);
}

inline std::vector<Observation> read_observations(const std::string& path) {
  std::vector<std::string> lines = detail::read_lines(path);
  require(!lines.empty(), ErrorCode::EmptyData, path + " is empty");
  require(lines[0] == "actuator,direction,metric,value", ErrorCode::FormatError,
          path + " has an unexpected header: '" + lines[0] + "'");
  require(lines.size() > 1, ErrorCode::EmptyData, path + " has no rows");
  std::vector<Observation> observations;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = detail::split_fields(lines[i]);
    require(fields.size() == 4, ErrorCode::FormatError,
            path + " row " + std::to_string(i) + " does not have 4 fields");
    Observation o;
    o.actuator = fields[0];
    o.direction = fields[1];
    o.metric = fields[2];
    o.value = detail::parse_number(fields[3], path + " row " + std::to_string(i));
    observations.push_back(o);
  }
  return observations;
}

}  // namespace lobeforge
