#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poroscat/forward.hpp"
#include "poroscat/inversion.hpp"
#include "poroscat/material.hpp"
#include "poroscat/scene.hpp"

namespace poroscat {

struct FractureSpec {
  Vec3 center = Vec3::Zero();
  double length = 1.0;
  double width = 1.0;  // out-of-plane extent
  double angle_pi = 0.0;  // angle from the x-axis in units of pi

  double angle() const { return angle_pi * kPi; }
  int cells_along = 1;
  int cells_across = 1;
  ContactParams contact;
};

/// Fully resolved experiment description (defaults filled in).
struct Scenario {
  // material
  bool dimensional = false;
  MaterialParams input_params;  // as given
  double input_omega = 0.0;
  ReferenceScales scales;
  MaterialParams params;  // dimensionless
  double omega = 0.0;     // dimensionless

  // scene
  std::vector<Polyline> wells;
  int samples_per_segment = 1;
  ChannelSet channels = ChannelSet::full;
  std::vector<FractureSpec> fractures;

  // sampling
  double region[4] = {0, 0, 0, 0};  // x_min, x_max, y_min, y_max
  int nx = 1, ny = 1;
  int n_dir = 1;
  bool full_circle = false;
  std::vector<int> iotas{1, 0};
  double sampling_z = 0.0;

  // forward
  SolveMode mode = SolveMode::local;
  double coupling_cutoff = 30.0;

  // noise
  std::optional<double> epsilon;
  std::optional<double> target_delta;
  std::uint64_t seed = 0;

  // inversion
  Method method = Method::lsm;
  AlphaPolicy alpha_policy = AlphaPolicy::per_point;
  double delta_floor = 1e-3;
  EtaBracket eta_bracket_relative{1e-16, 1e2};

  // check
  int admissibility_trials = 10000;

  // output
  std::string output_dir = "out";
  bool write_pgm = true;
};

/// Strict parse: unknown keys and missing required blocks raise
/// ValidationError with the JSON pointer of the offending field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);
nlohmann::json resolved_json(const Scenario& s);

FractureScene build_scene(const Scenario& s);
SamplingGrid build_sampling(const Scenario& s);

}  // namespace poroscat
