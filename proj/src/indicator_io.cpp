#include "poroscat/indicator_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "poroscat/errors.hpp"
#include "poroscat/matrix_io.hpp"

namespace poroscat {

void write_indicator_csv(std::ostream& os, const IndicatorMap& map) {
  const SamplingGrid& g = map.grid;
  os << "# method=" << to_string(map.method) << "\n";
  os << "# omega=" << format_double(map.omega) << "\n";
  os << "# delta=" << format_double(map.delta) << "\n";
  os << "# grid=" << format_double(g.x_min) << "," << format_double(g.x_max) << "," << format_double(g.y_min) << ","
     << format_double(g.y_max) << ";nx=" << g.nx << ";ny=" << g.ny << ";normals=" << g.normals.size()
     << ";iotas=";
  for (std::size_t i = 0; i < g.iotas.size(); ++i) os << (i ? "," : "") << g.iotas[i];
  os << "\n";
  os << "# raw_max=" << format_double(map.raw_max) << "\n";
  os << "# degenerate=" << (map.degenerate ? 1 : 0) << "\n";
  os << "x,y,raw,normalized,normal_index,iota\n";
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 x = g.point(p);
    os << format_double(x.x()) << "," << format_double(x.y()) << "," << format_double(map.raw[p]) << ","
       << format_double(map.normalized[p]) << "," << map.normal_index[p] << "," << map.iota[p] << "\n";
  }
  if (!os) throw IoError("failed writing indicator map");
}

void write_indicator_csv_file(const std::string& path, const IndicatorMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_indicator_csv(os, map);
}

void write_pgm(std::ostream& os, const IndicatorMap& map) {
  const SamplingGrid& g = map.grid;
  os << "P2\n" << g.nx << " " << g.ny << "\n255\n";
  for (int iy = g.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double v = map.normalized[static_cast<std::size_t>(iy) * g.nx + ix];
      const int level = std::isfinite(v) ? static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))) : 0;
      os << level << (ix + 1 < g.nx ? " " : "\n");
    }
  }
  if (!os) throw IoError("failed writing PGM");
}

void write_pgm_file(const std::string& path, const IndicatorMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_pgm(os, map);
}

}  // namespace poroscat
