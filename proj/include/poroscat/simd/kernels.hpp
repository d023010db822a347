#pragma once

#include <cstddef>

#include "poroscat/types.hpp"

// Data-parallel reductions on the spectral (SVD / eigen) representation of the
// regularized solutions. Scalar kernels are the reference; AVX2 variants are
// selected at runtime when the CPU supports them.
namespace poroscat::simd {

enum class Isa { scalar, avx2 };

struct SpectralSums {
  double residual_sq = 0.0;  // sum (eta/(s2+eta))^2 |c|^2
  double solution_sq = 0.0;  // sum s2 |c|^2 / (s2+eta)^2
};

namespace scalar {
SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta);
double complex_norm_sq(const cplx* x, std::size_t n);
double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n);
void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta);
double complex_norm_sq(const cplx* x, std::size_t n);
double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n);
void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out, std::size_t n);
}  // namespace avx2

bool cpu_has_avx2();
Isa active_isa();
/// Test hook: pin the dispatch to one ISA (ignored if the CPU lacks it).
void force_isa(Isa isa);
void clear_forced_isa();
const char* isa_name(Isa isa);

// Dispatched entry points.
SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta);
/// sum |x_i|^2
double complex_norm_sq(const cplx* x, std::size_t n);
/// sum w_i |x_i|^2
double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n);
/// out_i = c_i s_i / (s2_i + eta)
void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out, std::size_t n);

}  // namespace poroscat::simd
