#include "poroscat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "poroscat/errors.hpp"

namespace poroscat {

cplx ContactParams::alpha_tilde() const {
  if (model == ContactModel::high_permeability) return alpha_f;
  return alpha_f * Pi / (1.0 - alpha_f * beta_f * (1.0 - Pi));
}

cplx ContactParams::normal_stiffness() const {
  if (model == ContactModel::high_permeability) return k_n;
  return alpha_tilde() * k_n / (alpha_f * Pi);
}

void ContactParams::validate() const {
  if (k_t == cplx{}) throw DegenerateContactError("contact k_t must be nonzero");
  if (k_n == cplx{}) throw DegenerateContactError("contact k_n must be nonzero");
  if (!std::isfinite(std::abs(k_t)) || !std::isfinite(std::abs(k_n))) {
    throw DegenerateContactError("contact stiffness must be finite");
  }
  if (!(alpha_f > 0.0)) throw DegenerateContactError("contact alpha_f must be positive");
  if (model == ContactModel::high_permeability) return;
  if (beta_f == 0.0 || !std::isfinite(beta_f)) throw DegenerateContactError("contact beta_f must be nonzero");
  if (kappa_f == 0.0 || !std::isfinite(kappa_f)) throw DegenerateContactError("contact kappa_f must be nonzero");
  if (Pi == 0.0 || !std::isfinite(Pi)) throw DegenerateContactError("contact Pi must be nonzero");
  if (std::abs(1.0 - alpha_f * beta_f * (1.0 - Pi)) < 1e-12) {
    throw DegenerateContactError("contact alpha_tilde denominator vanishes");
  }
}

double FracturePatch::distance_to(const Vec3& x) const {
  const Vec3 d = x - center;
  const double a = std::clamp(d.dot(e1), -half1, half1);
  const double b = std::clamp(d.dot(e2), -half2, half2);
  return (d - a * e1 - b * e2).norm();
}

FracturePatch build_fracture_patch(const Vec3& center, const Vec3& e1_in, const Vec3& e2_in, double length1,
                                   double length2, int cells1, int cells2, const ContactParams& contact) {
  if (!(length1 > 0.0) || !(length2 > 0.0)) throw GeometryError("patch lengths must be positive");
  if (cells1 < 1 || cells2 < 1) throw GeometryError("patch cell counts must be >= 1");
  const double n1 = e1_in.norm();
  if (!(n1 > 1e-12)) throw GeometryError("patch frame e1 is degenerate");
  FracturePatch p;
  p.e1 = e1_in / n1;
  Vec3 e2 = e2_in - e2_in.dot(p.e1) * p.e1;
  const double n2 = e2.norm();
  if (!(n2 > 1e-9 * std::max(1.0, e2_in.norm()))) throw GeometryError("patch frame cannot be orthogonalized");
  p.e2 = e2 / n2;
  p.n = p.e1.cross(p.e2).normalized();
  p.center = center;
  p.half1 = 0.5 * length1;
  p.half2 = 0.5 * length2;
  p.cells1 = cells1;
  p.cells2 = cells2;
  p.contact = contact;
  const double h1 = length1 / cells1;
  const double h2 = length2 / cells2;
  p.cells.reserve(static_cast<std::size_t>(cells1) * cells2);
  for (int b = 0; b < cells2; ++b) {
    for (int a = 0; a < cells1; ++a) {
      const double s1 = -p.half1 + (a + 0.5) * h1;
      const double s2 = -p.half2 + (b + 0.5) * h2;
      p.cells.push_back({center + s1 * p.e1 + s2 * p.e2, h1 * h2});
    }
  }
  return p;
}

FracturePatch build_ribbon_patch(const Vec3& center, double length, double phi, double width, int cells_along,
                                 int cells_across, const ContactParams& contact) {
  return build_fracture_patch(center, Vec3(std::cos(phi), std::sin(phi), 0.0), Vec3::UnitZ(), length, width,
                              cells_along, cells_across, contact);
}

std::vector<int> channels_of(ChannelSet set) {
  switch (set) {
    case ChannelSet::full:
      return {0, 1, 2, 3};
    case ChannelSet::inplane:
      return {0, 1, 3};
    case ChannelSet::fluid:
      return {3};
  }
  return {};
}

ChannelSet parse_channel_set(const std::string& name) {
  if (name == "full") return ChannelSet::full;
  if (name == "inplane") return ChannelSet::inplane;
  if (name == "fluid") return ChannelSet::fluid;
  throw ConfigurationError("unknown channel set '" + name + "'");
}

std::string to_string(ChannelSet set) {
  switch (set) {
    case ChannelSet::full:
      return "full";
    case ChannelSet::inplane:
      return "inplane";
    case ChannelSet::fluid:
      return "fluid";
  }
  return "?";
}

SensingGrid build_sensing_grid(const std::vector<Polyline>& wells, int samples_per_segment, ChannelSet set) {
  if (samples_per_segment < 1) throw GeometryError("samples_per_segment must be >= 1");
  if (wells.empty()) throw GeometryError("at least one well polyline is required");
  SensingGrid grid;
  grid.channel_set = set;
  grid.channels = channels_of(set);
  for (const Polyline& line : wells) {
    if (line.size() < 2) throw GeometryError("a well polyline needs at least two vertices");
    for (std::size_t s = 0; s + 1 < line.size(); ++s) {
      const Vec3& a = line[s];
      const Vec3& b = line[s + 1];
      if (!((b - a).norm() > 0.0)) throw GeometryError("zero-length well segment");
      // Later segments of a polyline start at the shared vertex, already emitted.
      const int first = (s == 0) ? 0 : 1;
      for (int i = first; i < samples_per_segment; ++i) {
        const double t = samples_per_segment == 1 ? 0.5 : static_cast<double>(i) / (samples_per_segment - 1);
        grid.points.push_back(a + t * (b - a));
      }
    }
  }
  std::set<std::tuple<double, double, double>> seen;
  for (const Vec3& p : grid.points) {
    if (!seen.emplace(p.x(), p.y(), p.z()).second) throw GeometryError("duplicate sensing-grid point");
  }
  return grid;
}

Vec3 SamplingGrid::point(std::size_t index) const {
  const std::size_t ix = index % static_cast<std::size_t>(nx);
  const std::size_t iy = index / static_cast<std::size_t>(nx);
  return {x_min + (ix + 0.5) * dx(), y_min + (iy + 0.5) * dy(), z};
}

SamplingGrid build_sampling_grid(double x_min, double x_max, double y_min, double y_max, int nx, int ny,
                                 int n_dir, const std::vector<int>& iotas, bool full_circle, double z) {
  if (nx < 1 || ny < 1) throw ConfigurationError("sampling resolution must be >= 1 on each axis");
  if (n_dir < 1) throw ConfigurationError("n_dir must be >= 1");
  if (!(x_max > x_min) || !(y_max > y_min)) throw ConfigurationError("sampling region must have positive extent");
  if (iotas.empty()) throw ConfigurationError("excitation-type set is empty");
  for (int v : iotas) {
    if (v != 0 && v != 1) throw ConfigurationError("excitation type must be 0 or 1");
  }
  SamplingGrid g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.y_min = y_min;
  g.y_max = y_max;
  g.z = z;
  g.nx = nx;
  g.ny = ny;
  g.iotas = iotas;
  std::sort(g.iotas.begin(), g.iotas.end(), std::greater<int>());
  g.iotas.erase(std::unique(g.iotas.begin(), g.iotas.end()), g.iotas.end());
  for (int k = 0; k < n_dir; ++k) {
    const double t = full_circle ? 2.0 * kPi * k / n_dir : kPi * k / n_dir;
    const Vec3 v(std::cos(t), std::sin(t), 0.0);
    // Undirected normals: v and -v describe the same trial crack.
    const bool antipodal = std::any_of(g.normals.begin(), g.normals.end(),
                                       [&](const Vec3& w) { return (v + w).norm() < 1e-9; });
    if (!antipodal) g.normals.push_back(v);
  }
  return g;
}

std::size_t FractureScene::num_cells() const {
  std::size_t total = 0;
  for (const auto& p : patches) total += p.cells.size();
  return total;
}

void FractureScene::validate(double clearance) const {
  if (grid.points.empty()) throw GeometryError("sensing grid is empty");
  for (std::size_t pi = 0; pi < patches.size(); ++pi) {
    patches[pi].contact.validate();
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      if (!(patches[pi].distance_to(grid.points[i]) > clearance)) {
        throw GeometryError("sensing point " + std::to_string(i) + " lies on fracture patch " +
                            std::to_string(pi));
      }
    }
  }
}

}  // namespace poroscat
