#pragma once

#include <iosfwd>
#include <string>

#include "poroscat/forward.hpp"

namespace poroscat {

/// 17 significant digits: enough to round-trip every finite double.
std::string format_double(double value);
double parse_double(const std::string& text);

/// '#'-prefixed key=value header, then one "re,im" line per entry, row-major.
void write_matrix(std::ostream& os, const ScatteringMatrix& m);
ScatteringMatrix read_matrix(std::istream& is);

void write_matrix_file(const std::string& path, const ScatteringMatrix& m);
ScatteringMatrix read_matrix_file(const std::string& path);

}  // namespace poroscat
