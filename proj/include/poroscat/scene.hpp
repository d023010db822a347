#pragma once

#include <string>
#include <vector>

#include "poroscat/types.hpp"

namespace poroscat {

enum class ContactModel { finite_permeability, high_permeability };

/// Interface law of a fracture. Stiffnesses may be complex (viscous contact).
struct ContactParams {
  cplx k_t{1.0, 0.0};
  cplx k_n{1.0, 0.0};
  double kappa_f = 1.0;
  double alpha_f = 0.85;
  double beta_f = 0.3;
  double Pi = 1.0;
  ContactModel model = ContactModel::finite_permeability;

  /// alpha_f Pi / (1 - alpha_f beta_f (1 - Pi)); alpha_f for the high-permeability model.
  cplx alpha_tilde() const;
  /// Normal stiffness entry of K: alpha_tilde k_n / (alpha_f Pi), or k_n at high permeability.
  cplx normal_stiffness() const;
  void validate() const;
};

struct Cell {
  Vec3 center;
  double area = 0.0;
};

/// Flat rectangular patch with frame (e1, e2, n) and a cell tiling.
struct FracturePatch {
  Vec3 center = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 n = Vec3::UnitZ();
  double half1 = 0.0;
  double half2 = 0.0;
  int cells1 = 1;
  int cells2 = 1;
  std::vector<Cell> cells;
  ContactParams contact;

  double area() const { return 4.0 * half1 * half2; }
  /// Shortest distance from x to the closed rectangle.
  double distance_to(const Vec3& x) const;
};

/// Gram-Schmidt on (e1, e2); lengths are full edge lengths.
FracturePatch build_fracture_patch(const Vec3& center, const Vec3& e1, const Vec3& e2, double length1,
                                   double length2, int cells1, int cells2, const ContactParams& contact);

/// Vertical ribbon: long axis at angle phi from the x-axis in the z = 0 plane,
/// out-of-plane extent `width` along z, normal (sin phi, -cos phi, 0).
FracturePatch build_ribbon_patch(const Vec3& center, double length, double phi, double width, int cells_along,
                                 int cells_across, const ContactParams& contact);

enum class ChannelSet { full, inplane, fluid };

/// Source/receiver channel k at a grid point: 0..2 = force/displacement
/// along x, y, z; 3 = fluid source/pressure.
std::vector<int> channels_of(ChannelSet set);
ChannelSet parse_channel_set(const std::string& name);
std::string to_string(ChannelSet set);

struct SensingGrid {
  std::vector<Vec3> points;
  ChannelSet channel_set = ChannelSet::full;
  std::vector<int> channels = channels_of(ChannelSet::full);

  std::size_t size() const { return points.size(); }
  int num_channels() const { return static_cast<int>(channels.size()); }
  /// Row/column index of (point, channel slot) in the scattering matrix.
  std::size_t index(std::size_t point, int slot) const { return point * channels.size() + slot; }
  std::size_t dimension() const { return points.size() * channels.size(); }
};

using Polyline = std::vector<Vec3>;

SensingGrid build_sensing_grid(const std::vector<Polyline>& wells, int samples_per_segment,
                               ChannelSet set = ChannelSet::full);

struct SamplingGrid {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0, z = 0.0;
  int nx = 1;
  int ny = 1;
  std::vector<Vec3> normals;
  std::vector<int> iotas;

  std::size_t num_points() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t num_triplets() const { return num_points() * normals.size() * iotas.size(); }
  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  /// Cell-centred, row-major (x fastest).
  Vec3 point(std::size_t index) const;
};

/// Normals are (cos t, sin t, 0) with t = k pi / n_dir (undirected half circle)
/// or, with full_circle, t = 2 k pi / n_dir with antipodal duplicates removed.
SamplingGrid build_sampling_grid(double x_min, double x_max, double y_min, double y_max, int nx, int ny,
                                 int n_dir, const std::vector<int>& iotas, bool full_circle = false,
                                 double z = 0.0);

struct FractureScene {
  std::vector<FracturePatch> patches;
  SensingGrid grid;

  std::size_t num_cells() const;
  /// Throws GeometryError if a grid point lies within `clearance` of a patch.
  void validate(double clearance = 1e-9) const;
};

}  // namespace poroscat
