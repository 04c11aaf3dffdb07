#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spavg {

/// Shortest decimal string that parses back to exactly `v`.
std::string fmt_double(double v);

/// Parses a full string as a double; throws Error(Config) on junk.
double parse_double(std::string_view s);

/// Euclidean norm.
double norm2(std::span<const double> v);

/// Euclidean distance between two equally sized vectors.
double dist2(std::span<const double> a, std::span<const double> b);

/// Joins values with commas using fmt_double.
std::string join_csv(std::span<const double> values);

}  // namespace spavg
