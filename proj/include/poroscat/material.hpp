#pragma once

#include "poroscat/types.hpp"

namespace poroscat {

/// Reference scales used to make the Biot constants dimensionless.
struct ReferenceScales {
  double mu_r = 1.0;   // Pa
  double rho_r = 1.0;  // kg/m^3
  double ell_r = 1.0;  // m

  /// Scales built from a dimensional material: mu_r = mu, rho_r = rho and
  /// ell_r = the drained shear wavelength 2*pi/omega * sqrt(mu/rho).
  static ReferenceScales from_shear_wavelength(double mu, double rho, double omega);
  void validate() const;
};

/// Drained Biot constants. The same struct holds dimensional (SI) or
/// dimensionless values; `nondimensionalize` maps one onto the other.
struct MaterialParams {
  double lambda = 0.0;
  double mu = 0.0;
  double M = 0.0;
  double rho = 0.0;
  double rho_f = 0.0;
  double rho_a = 0.0;
  double kappa = 0.0;
  double phi = 0.0;
  double alpha = 0.0;

  /// Throws DomainError naming the first offending field.
  void validate() const;
};

struct DimensionlessProblem {
  MaterialParams params;
  double omega = 0.0;
};

/// Reference sandstone background (dimensionless).
MaterialParams reference_params();
inline constexpr double kReferenceOmega = 3.91;

DimensionlessProblem nondimensionalize(const MaterialParams& dimensional, double omega_dimensional,
                                       const ReferenceScales& scales);

/// gamma = rho_a/phi^2 + rho_f/phi + i/(omega*kappa).
cplx compute_gamma(const MaterialParams& params, double omega);

struct WaveState {
  double omega = 0.0;
  cplx gamma;
  cplx k_s;
  cplx k_p1;  // fast dilatational wave
  cplx k_p2;  // slow dilatational wave
  cplx A1;
  cplx A2;

  cplx speed_s() const { return omega / k_s; }
  cplx speed_p1() const { return omega / k_p1; }
  cplx speed_p2() const { return omega / k_p2; }
  /// Smallest attenuation over the three modes.
  double min_attenuation() const;
};

WaveState solve_dispersion(const MaterialParams& params, double omega);

/// Same as solve_dispersion but with a caller-supplied coupling coefficient.
/// Wavenumbers stay on the Im(k) >= 0 branch, so conj(gamma) yields k = -conj(k)
/// and a kernel equal to the complex conjugate of the original one.
WaveState solve_dispersion_with_gamma(const MaterialParams& params, double omega, cplx gamma);

/// Every complex field conjugated (gamma, k, A): the analytic continuation of
/// the state to conj(gamma) without switching to the decaying branch.
WaveState conjugate_continued(const WaveState& wave);

}  // namespace poroscat
