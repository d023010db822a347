#include "poroscat/simd/kernels.hpp"

namespace poroscat::simd::scalar {

SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta) {
  SpectralSums out;
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / (s2[i] + eta);
    const double f = eta * inv;
    out.residual_sq += f * f * c2[i];
    out.solution_sq += s2[i] * c2[i] * inv * inv;
  }
  return out;
}

double complex_norm_sq(const cplx* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return acc;
}

double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
  return acc;
}

void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c[i] * (s[i] / (s2[i] + eta));
}

}  // namespace poroscat::simd::scalar
