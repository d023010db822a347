#pragma once

#include <iosfwd>
#include <string>

#include "poroscat/inversion.hpp"

namespace poroscat {

/// '#' header (method, omega, delta, grid), then
/// x,y,raw,normalized,normal_index,iota per sampling point (row-major).
void write_indicator_csv(std::ostream& os, const IndicatorMap& map);
void write_indicator_csv_file(const std::string& path, const IndicatorMap& map);

/// 8-bit plain PGM (P2) of the normalized map; first row is the largest y.
void write_pgm(std::ostream& os, const IndicatorMap& map);
void write_pgm_file(const std::string& path, const IndicatorMap& map);

}  // namespace poroscat
