#include <atomic>

#include "poroscat/simd/kernels.hpp"

namespace poroscat::simd {

namespace {

constexpr int kNoOverride = -1;
std::atomic<int> g_forced{kNoOverride};

Isa detect() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return has;
#else
  return false;
#endif
}

Isa active_isa() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced != kNoOverride) {
    const Isa isa = static_cast<Isa>(forced);
    if (isa == Isa::scalar || cpu_has_avx2()) return isa;
  }
  static const Isa detected = detect();
  return detected;
}

void force_isa(Isa isa) { g_forced.store(static_cast<int>(isa), std::memory_order_relaxed); }
void clear_forced_isa() { g_forced.store(kNoOverride, std::memory_order_relaxed); }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

SpectralSums spectral_sums(const double* s2, const double* c2, std::size_t n, double eta) {
  return active_isa() == Isa::avx2 ? avx2::spectral_sums(s2, c2, n, eta) : scalar::spectral_sums(s2, c2, n, eta);
}

double complex_norm_sq(const cplx* x, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::complex_norm_sq(x, n) : scalar::complex_norm_sq(x, n);
}

double weighted_abs_sq_sum(const double* w, const cplx* x, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::weighted_abs_sq_sum(w, x, n) : scalar::weighted_abs_sq_sum(w, x, n);
}

void filter_scale(const double* s, const double* s2, const cplx* c, double eta, cplx* out, std::size_t n) {
  if (active_isa() == Isa::avx2) {
    avx2::filter_scale(s, s2, c, eta, out, n);
  } else {
    scalar::filter_scale(s, s2, c, eta, out, n);
  }
}

}  // namespace poroscat::simd
