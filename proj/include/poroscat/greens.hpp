#pragma once

#include <array>

#include "poroscat/material.hpp"
#include "poroscat/types.hpp"

namespace poroscat {

/// Rows (u1, u2, u3, p) of the field at xi; columns (f1, f2, f3, fluid) of the
/// point source at y: [[U^s, u^f], [p^s, p^f]].
using GreenTensor = Eigen::Matrix<cplx, 4, 4>;

/// Rows (t1, t2, t3, q, p) of the trace at xi with normal n; columns as above.
using TraceKernel = Eigen::Matrix<cplx, 5, 4>;

/// order-th radial derivative of e^{ikr}/(4 pi r); order in 0..4.
cplx helmholtz_kernel(cplx k, double r, int order);

/// Fundamental solution and its traces for one (WaveState, MaterialParams)
/// pair. All spatial derivatives are taken with respect to the field point xi.
class GreensKernel {
 public:
  GreensKernel(const WaveState& wave, const MaterialParams& params);

  GreenTensor tensor(const Vec3& y, const Vec3& xi) const;
  TraceKernel trace(const Vec3& y, const Vec3& xi, const Vec3& n) const;
  /// d/dxi_m of trace(y, xi, n) with n held fixed, m = 0, 1, 2.
  std::array<TraceKernel, 3> trace_gradient(const Vec3& y, const Vec3& xi, const Vec3& n) const;

  const WaveState& wave() const { return wave_; }
  const MaterialParams& params() const { return params_; }

  // Kernel coefficients (exposed for tests).
  cplx coeff_U() const { return cU_; }
  cplx coeff_ps() const { return cp_; }
  cplx coeff_pf1() const { return a1_; }
  cplx coeff_pf2() const { return a2_; }

 private:
  struct Jet;
  void fill_jet(const Vec3& y, const Vec3& xi, int depth, Jet& jet) const;

  WaveState wave_;
  MaterialParams params_;
  cplx cU_, cp_, a1_, a2_;
};

GreenTensor green_tensor(const Vec3& y, const Vec3& xi, const WaveState& wave, const MaterialParams& params);
TraceKernel trace_kernel(const Vec3& y, const Vec3& xi, const Vec3& n, const WaveState& wave,
                         const MaterialParams& params);

/// Throws DomainError unless | |n| - 1 | <= 1e-10.
void require_unit_normal(const Vec3& n);

}  // namespace poroscat
