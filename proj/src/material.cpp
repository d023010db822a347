#include "poroscat/material.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poroscat/errors.hpp"

namespace poroscat {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be positive and finite (got " +
                      std::to_string(value) + ")");
  }
}

// Root of z with non-negative imaginary part.
cplx decaying_sqrt(cplx z) {
  cplx root = std::sqrt(z);
  if (root.imag() < 0.0 || (root.imag() == 0.0 && root.real() < 0.0)) root = -root;
  return root;
}

}  // namespace

ReferenceScales ReferenceScales::from_shear_wavelength(double mu, double rho, double omega) {
  require_positive(mu, "mu");
  require_positive(rho, "rho");
  require_positive(omega, "omega");
  return {mu, rho, 2.0 * kPi / omega * std::sqrt(mu / rho)};
}

void ReferenceScales::validate() const {
  require_positive(mu_r, "mu_r");
  require_positive(rho_r, "rho_r");
  require_positive(ell_r, "ell_r");
}

void MaterialParams::validate() const {
  require_positive(lambda, "lambda");
  require_positive(mu, "mu");
  require_positive(M, "M");
  require_positive(rho, "rho");
  require_positive(rho_f, "rho_f");
  require_positive(kappa, "kappa");
  if (!(rho >= rho_f)) throw DomainError("rho must be >= rho_f");
  if (!(rho_a >= 0.0) || !std::isfinite(rho_a)) throw DomainError("rho_a must be non-negative");
  if (!(phi > 0.0 && phi < 1.0)) throw DomainError("phi must lie in (0, 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
}

MaterialParams reference_params() {
  MaterialParams p;
  p.lambda = 0.47;
  p.mu = 1.0;
  p.M = 1.66;
  p.rho = 2.27;
  p.rho_f = 1.0;
  p.rho_a = 0.117;
  p.kappa = 24.5e-7;
  p.phi = 0.195;
  p.alpha = 0.83;
  return p;
}

DimensionlessProblem nondimensionalize(const MaterialParams& d, double omega, const ReferenceScales& s) {
  s.validate();
  require_positive(d.lambda, "lambda");
  require_positive(d.mu, "mu");
  require_positive(d.M, "M");
  require_positive(d.rho, "rho");
  require_positive(d.rho_f, "rho_f");
  require_positive(d.rho_a, "rho_a");
  require_positive(d.kappa, "kappa");
  require_positive(d.phi, "phi");
  require_positive(d.alpha, "alpha");
  require_positive(omega, "omega");

  DimensionlessProblem out;
  MaterialParams& p = out.params;
  p.lambda = d.lambda / s.mu_r;
  p.mu = d.mu / s.mu_r;
  p.M = d.M / s.mu_r;
  p.rho = d.rho / s.rho_r;
  p.rho_f = d.rho_f / s.rho_r;
  p.rho_a = d.rho_a / s.rho_r;
  p.kappa = std::sqrt(s.mu_r * s.rho_r) / s.ell_r * d.kappa;
  p.phi = d.phi;
  p.alpha = d.alpha;
  out.omega = std::sqrt(s.rho_r / s.mu_r) * s.ell_r * omega;
  return out;
}

cplx compute_gamma(const MaterialParams& p, double omega) {
  if (omega == 0.0) throw SingularParameterError("omega = 0 in the coupling coefficient");
  if (p.kappa == 0.0) throw SingularParameterError("kappa = 0 in the coupling coefficient");
  require_positive(omega, "omega");
  require_positive(p.kappa, "kappa");
  require_positive(p.phi, "phi");
  return {p.rho_a / (p.phi * p.phi) + p.rho_f / p.phi, 1.0 / (omega * p.kappa)};
}

double WaveState::min_attenuation() const {
  return std::min({k_s.imag(), k_p1.imag(), k_p2.imag()});
}

WaveState solve_dispersion_with_gamma(const MaterialParams& p, double omega, cplx gamma) {
  require_positive(omega, "omega");
  const double w2 = omega * omega;
  const double lam2mu = p.lambda + 2.0 * p.mu;
  const cplx rho_t = p.rho - p.rho_f * p.rho_f / gamma;
  const cplx beta = p.alpha - p.rho_f / gamma;

  WaveState ws;
  ws.omega = omega;
  ws.gamma = gamma;
  ws.k_s = decaying_sqrt(w2 * rho_t / p.mu);

  // a x^2 - b x + c = 0 with x = k^2; evaluated in the cancellation-free form.
  const cplx a = lam2mu / (gamma * w2);
  const cplx b = rho_t / gamma + lam2mu / p.M + beta * beta;
  const cplx c = w2 * rho_t / p.M;
  const cplx disc = std::sqrt(b * b - 4.0 * a * c);
  const cplx q = (std::abs(b + disc) >= std::abs(b - disc)) ? 0.5 * (b + disc) : 0.5 * (b - disc);
  if (q == cplx{0.0, 0.0}) throw DispersionDegeneracyError("vanishing dilatational roots");
  cplx x1 = q / a;
  cplx x2 = c / q;
  // A double root only separates to ~sqrt(eps) under rounding.
  if (std::abs(x1 - x2) <= 1e-7 * std::max(std::abs(x1), std::abs(x2))) {
    throw DispersionDegeneracyError("coincident dilatational roots; A1, A2 undefined");
  }
  cplx k1 = decaying_sqrt(x1);
  cplx k2 = decaying_sqrt(x2);
  // Fast wave (larger phase speed, smaller wavenumber) is p1.
  if (std::abs(k1) > std::abs(k2)) {
    std::swap(k1, k2);
    std::swap(x1, x2);
  }
  ws.k_p1 = k1;
  ws.k_p2 = k2;
  const cplx gw2 = gamma * w2;
  ws.A1 = x2 * (x1 * p.M - gw2) / (gw2 * (x1 - x2));
  ws.A2 = x1 * (x2 * p.M - gw2) / (gw2 * (x2 - x1));
  return ws;
}

WaveState conjugate_continued(const WaveState& w) {
  WaveState c = w;
  c.gamma = std::conj(w.gamma);
  c.k_s = std::conj(w.k_s);
  c.k_p1 = std::conj(w.k_p1);
  c.k_p2 = std::conj(w.k_p2);
  c.A1 = std::conj(w.A1);
  c.A2 = std::conj(w.A2);
  return c;
}

WaveState solve_dispersion(const MaterialParams& p, double omega) {
  p.validate();
  return solve_dispersion_with_gamma(p, omega, compute_gamma(p, omega));
}

}  // namespace poroscat
