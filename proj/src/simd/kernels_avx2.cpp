#include "poroscat/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define POROSCAT_X86 1
#define POROSCAT_AVX2_TARGET __attribute__((target("avx2,fma")))
#else
#define POROSCAT_X86 0
#define POROSCAT_AVX2_TARGET
#endif

namespace poroscat::simd::avx2 {

#if POROSCAT_X86

namespace {

POROSCAT_AVX2_TARGET inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

POROSCAT_AVX2_TARGET SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta) {
  const __m256d veta = _mm256_set1_pd(eta);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d res = _mm256_setzero_pd();
  __m256d sol = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_loadu_pd(s2 + i);
    const __m256d c = _mm256_loadu_pd(c2 + i);
    const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(s, veta));
    const __m256d f = _mm256_mul_pd(veta, inv);
    res = _mm256_fmadd_pd(_mm256_mul_pd(f, f), c, res);
    sol = _mm256_fmadd_pd(_mm256_mul_pd(s, c), _mm256_mul_pd(inv, inv), sol);
  }
  SpectralSums out{hsum(res), hsum(sol)};
  const SpectralSums tail = scalar::spectral_sums(s2 + i, c2 + i, n - i, eta);
  out.residual_sq += tail.residual_sq;
  out.solution_sq += tail.solution_sq;
  return out;
}

POROSCAT_AVX2_TARGET double complex_norm_sq(const cplx* x, std::size_t n) {
  // std::complex<double> is layout-compatible with double[2].
  const double* d = reinterpret_cast<const double*>(x);
  const std::size_t m = 2 * n;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= m; i += 8) {
    const __m256d a = _mm256_loadu_pd(d + i);
    const __m256d b = _mm256_loadu_pd(d + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < m; ++i) total += d[i] * d[i];
  return total;
}

POROSCAT_AVX2_TARGET double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n) {
  const double* d = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // (re0, im0, re1, im1) weighted by (w0, w0, w1, w1)
    const __m256d v = _mm256_loadu_pd(d + 2 * i);
    const __m128d wp = _mm_loadu_pd(w + i);
    const __m256d ww = _mm256_permute4x64_pd(_mm256_castpd128_pd256(wp), 0x50);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), ww, acc);
  }
  double total = hsum(acc);
  total += scalar::weighted_abs_sq_sum(w + i, x + i, n - i);
  return total;
}

POROSCAT_AVX2_TARGET void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out,
                                       std::size_t n) {
  const double* cd = reinterpret_cast<const double*>(c);
  double* od = reinterpret_cast<double*>(out);
  const __m256d veta = _mm256_set1_pd(eta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d sv = _mm_loadu_pd(s + i);
    const __m128d qv = _mm_add_pd(_mm_loadu_pd(s2 + i), _mm256_castpd256_pd128(veta));
    const __m128d f = _mm_div_pd(sv, qv);
    const __m256d ff = _mm256_permute4x64_pd(_mm256_castpd128_pd256(f), 0x50);
    _mm256_storeu_pd(od + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(cd + 2 * i), ff));
  }
  scalar::filter_scale(s + i, s2 + i, c + i, eta, out + i, n - i);
}

#else

SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta) {
  return scalar::spectral_sums(s2, c2, n, eta);
}
double complex_norm_sq(const cplx* x, std::size_t n) { return scalar::complex_norm_sq(x, n); }
double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n) {
  return scalar::weighted_abs_sq_sum(w, x, n);
}
void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out, std::size_t n) {
  scalar::filter_scale(s, s2, c, eta, out, n);
}

#endif

}  // namespace poroscat::simd::avx2
