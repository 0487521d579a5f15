#include "format.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "clfpde/error.hpp"

namespace clfpde {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& values, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt_double(values[i]);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    parts.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw Error(ErrorCode::ConfigInvalid, "expected a number, got empty text");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw Error(ErrorCode::ConfigInvalid, "not a number: '" + s + "'");
  return v;
}

long parse_int(const std::string& raw) {
  const std::string s = trim(raw);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw Error(ErrorCode::ConfigInvalid, "not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

}  // namespace clfpde
