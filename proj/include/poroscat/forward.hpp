#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poroscat/greens.hpp"
#include "poroscat/material.hpp"
#include "poroscat/scene.hpp"
#include "poroscat/types.hpp"

namespace poroscat {

using Vec5c = Eigen::Matrix<cplx, 5, 1>;
using Mat5c = Eigen::Matrix<cplx, 5, 5>;

/// Collocation cell of the flattened fracture network.
struct CellRef {
  Vec3 center;
  Vec3 n;
  double area = 0.0;
  std::size_t patch = 0;
};

std::vector<CellRef> flatten_cells(const std::vector<FracturePatch>& patches);

/// Incident traces (t(3), q, p) per cell.
struct TraceState {
  std::vector<Vec5c> cells;
};

/// Densities ([[u]](3), [[p]], -[[q]]) per cell.
struct JumpState {
  std::vector<Vec5c> cells;
};

/// Trace of a point source of type `source` (0..2 force, 3 fluid) at y.
TraceState incident_traces(const Vec3& y, int source, const std::vector<FracturePatch>& patches,
                           const GreensKernel& kernel, cplx amplitude = 1.0);

/// 5x5 map from incident traces to the density of one cell (local closure).
Mat5c local_closure_matrix(const FracturePatch& patch, double omega);

JumpState local_jump_solve(const TraceState& traces, const std::vector<FracturePatch>& patches, double omega);

struct InteractingReport {
  double rcond = 0.0;
  double residual = 0.0;
  std::size_t dropped_pairs = 0;
};

/// Cell-to-cell scattered-trace operator (area weighted, self cell excluded);
/// patch pairs farther apart than cutoff / min Im(k) are not coupled.
/// A non-positive cutoff keeps every pair.
CMatrix coupling_matrix(const std::vector<FracturePatch>& patches, const GreensKernel& kernel, double cutoff,
                        std::size_t* dropped_pairs = nullptr);

JumpState interacting_jump_solve(const TraceState& traces, const std::vector<FracturePatch>& patches,
                                 const GreensKernel& kernel, double cutoff, InteractingReport* report = nullptr);

struct RadiatedField {
  std::vector<Eigen::Vector4cd> values;  // (u1, u2, u3, p) per observation point
  std::size_t near_singular = 0;         // points closer than one cell diameter to a patch
};

RadiatedField radiate(const JumpState& jumps, const std::vector<FracturePatch>& patches,
                      const std::vector<Vec3>& observers, const GreensKernel& kernel);

enum class SolveMode { local, interacting };
SolveMode parse_solve_mode(const std::string& name);
std::string to_string(SolveMode mode);

struct ForwardOptions {
  SolveMode mode = SolveMode::local;
  double coupling_cutoff = 30.0;
  int threads = 0;
};

struct ScatteringMatrix {
  CMatrix values;
  std::size_t num_points = 0;
  std::vector<int> channels;
  double omega = 0.0;
  std::string provenance = "clean";
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double delta = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(values.rows()); }
};

/// S: rows (cell, trace row), columns (grid point, channel).
CMatrix trace_matrix(const FractureScene& scene, const GreensKernel& kernel, int threads = 0);
/// Radiation matrix; equals S^T W with W the cell areas.
CMatrix radiation_matrix(const FractureScene& scene, const GreensKernel& kernel, int threads = 0);
/// Block-diagonal local closure.
CMatrix local_T_matrix(const FractureScene& scene, double omega);
/// (I - T_loc C)^{-1} T_loc.
CMatrix interacting_T_matrix(const FractureScene& scene, const GreensKernel& kernel, double cutoff,
                             InteractingReport* report = nullptr);

ScatteringMatrix assemble_lambda(const FractureScene& scene, const WaveState& wave, const MaterialParams& params,
                                 const ForwardOptions& options = {}, InteractingReport* report = nullptr);

struct NoiseSpec {
  std::optional<double> epsilon;
  std::optional<double> target_delta;
};

/// Lambda^delta = (I + N) Lambda with Re/Im of N uniform on [-eps, eps], filled
/// row-major from a seeded mt19937_64. A target delta rescales N once.
ScatteringMatrix inject_noise(const ScatteringMatrix& clean, const NoiseSpec& spec, std::uint64_t seed);

/// Largest singular value.
double spectral_norm(const CMatrix& m);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

struct AdmissibilityReport {
  bool admissible = false;
  double worst_imag = 0.0;  // max over trials of Im<P phi, phi> / |phi|^2
  double tolerance = 0.0;
  int trials = 0;
};

/// Interface map (jumps) -> (t + t^i, q + q^i, p + p^i) of one cell.
Mat5c admissibility_map(const ContactParams& contact, const Vec3& e1, const Vec3& e2, const Vec3& n,
                        double omega);

AdmissibilityReport check_admissibility(const ContactParams& contact, double omega, int trials, std::uint64_t seed);

}  // namespace poroscat
