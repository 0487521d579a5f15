#pragma once

#include <string>
#include <vector>

namespace clfpde {

// Shortest text that round-trips a double exactly.
std::string fmt_double(double v);
std::string join_doubles(const std::vector<double>& values, const std::string& sep = ", ");

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char delim);

double parse_double(const std::string& s);
long parse_int(const std::string& s);
std::vector<double> parse_doubles(const std::string& s);

}  // namespace clfpde
