#include "poroscat/greens.hpp"

#include <cmath>
#include <string>

#include "poroscat/errors.hpp"

namespace poroscat {

namespace {

constexpr int kMaxOrder = 4;
constexpr double kInv4Pi = 1.0 / (4.0 * kPi);

inline double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

double checked_distance(const Vec3& y, const Vec3& xi) {
  const double r = (xi - y).norm();
  if (!(r > 1e-12) || !std::isfinite(r)) {
    throw SingularityError("kernel evaluated at coincident points (r = " + std::to_string(r) + ")");
  }
  return r;
}

// D^n of e^{ikr}/(4 pi r), D = (1/r) d/dr, n = 0..4. Each D^n is
// e^{ikr} times a Laurent polynomial in 1/r; D maps c_m r^-m to
// ik c_m r^-(m+1) - m c_m r^-(m+2).
struct Radial {
  cplx d[kMaxOrder + 1];
};

Radial radial_mode(cplx k, double r, int depth) {
  constexpr int kTerms = 2 * kMaxOrder + 2;
  cplx c[kTerms] = {};
  c[1] = 1.0;
  const cplx ik = kI * k;
  const double inv_r = 1.0 / r;
  const cplx e = std::exp(ik * r) * kInv4Pi;
  Radial out;
  for (int n = 0; n <= kMaxOrder; ++n) {
    if (n > depth) {
      out.d[n] = 0.0;
      continue;
    }
    cplx acc = 0.0;
    double rp = 1.0;
    for (int m = 0; m < kTerms; ++m) {
      acc += c[m] * rp;
      rp *= inv_r;
    }
    out.d[n] = e * acc;
    cplx next[kTerms] = {};
    for (int m = 0; m + 2 < kTerms; ++m) {
      if (c[m] == cplx{}) continue;
      next[m + 1] += ik * c[m];
      next[m + 2] -= static_cast<double>(m) * c[m];
    }
    for (int m = 0; m < kTerms; ++m) c[m] = next[m];
  }
  return out;
}

Radial combine(cplx a, const Radial& ra, cplx b, const Radial& rb, cplx c, const Radial& rc) {
  Radial out;
  for (int n = 0; n <= kMaxOrder; ++n) out.d[n] = a * ra.d[n] + b * rb.d[n] + c * rc.d[n];
  return out;
}

// Cartesian derivatives of a radial function with x = xi - y.
inline cplx cd1(const Radial& f, const Vec3& x, int i) { return x[i] * f.d[1]; }

inline cplx cd2(const Radial& f, const Vec3& x, int i, int j) {
  return delta(i, j) * f.d[1] + x[i] * x[j] * f.d[2];
}

inline cplx cd3(const Radial& f, const Vec3& x, int i, int j, int k) {
  return (delta(i, j) * x[k] + delta(i, k) * x[j] + delta(j, k) * x[i]) * f.d[2] + x[i] * x[j] * x[k] * f.d[3];
}

inline cplx cd4(const Radial& f, const Vec3& x, int i, int j, int k, int l) {
  const double dd = delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k);
  const double dxx = delta(i, j) * x[k] * x[l] + delta(i, k) * x[j] * x[l] + delta(i, l) * x[j] * x[k] +
                     delta(j, k) * x[i] * x[l] + delta(j, l) * x[i] * x[k] + delta(k, l) * x[i] * x[j];
  return dd * f.d[2] + dxx * f.d[3] + x[i] * x[j] * x[k] * x[l] * f.d[4];
}

}  // namespace

cplx helmholtz_kernel(cplx k, double r, int order) {
  if (!(r > 0.0)) throw SingularityError("helmholtz_kernel requires r > 0");
  if (order < 0 || order > kMaxOrder) throw DomainError("helmholtz_kernel order must lie in 0..4");
  // d/dr of e^{ikr} r^-m is e^{ikr}(ik r^-m - m r^-(m+1)).
  constexpr int kTerms = kMaxOrder + 2;
  cplx c[kTerms] = {};
  c[1] = 1.0;
  const cplx ik = kI * k;
  for (int n = 0; n < order; ++n) {
    cplx next[kTerms] = {};
    for (int m = 0; m + 1 < kTerms; ++m) {
      next[m] += ik * c[m];
      next[m + 1] -= static_cast<double>(m) * c[m];
    }
    for (int m = 0; m < kTerms; ++m) c[m] = next[m];
  }
  cplx acc = 0.0;
  double rp = 1.0;
  for (int m = 0; m < kTerms; ++m) {
    acc += c[m] * rp;
    rp /= r;
  }
  return std::exp(ik * r) * kInv4Pi * acc;
}

void require_unit_normal(const Vec3& n) {
  if (!(std::abs(n.norm() - 1.0) <= 1e-10)) throw DomainError("normal vector must have unit length");
}

// Displacement/pressure of the four unit sources and their derivatives up to
// second order. Index order: component, derivative(s), source.
struct GreensKernel::Jet {
  cplx u[3][4];
  cplx p[4];
  cplx du[3][3][4];
  cplx dp[3][4];
  cplx ddu[3][3][3][4];
  cplx ddp[3][3][4];
};

GreensKernel::GreensKernel(const WaveState& wave, const MaterialParams& params) : wave_(wave), params_(params) {
  const double w2 = wave.omega * wave.omega;
  const cplx g = wave.gamma;
  const double lam2mu = params.lambda + 2.0 * params.mu;
  const cplx x1 = wave.k_p1 * wave.k_p1;
  const cplx x2 = wave.k_p2 * wave.k_p2;
  const cplx rg = params.rho * g - params.rho_f * params.rho_f;
  cU_ = g / (w2 * rg);
  cp_ = w2 * (params.alpha * g - params.rho_f) / (lam2mu * (x1 - x2));
  const cplx c0 = w2 * rg / (g * lam2mu);
  a1_ = -g * w2 * (x1 - c0) / (x2 - x1);
  a2_ = g * w2 * (x2 - c0) / (x2 - x1);
}

void GreensKernel::fill_jet(const Vec3& y, const Vec3& xi, int depth, Jet& jet) const {
  const double r = checked_distance(y, xi);
  const Vec3 x = xi - y;
  const int rdepth = depth + 2;
  const Radial gs = radial_mode(wave_.k_s, r, rdepth);
  const Radial g1 = radial_mode(wave_.k_p1, r, rdepth);
  const Radial g2 = radial_mode(wave_.k_p2, r, rdepth);
  const Radial phi = combine(1.0, gs, -wave_.A1, g1, -wave_.A2, g2);
  const Radial psi = combine(0.0, gs, 1.0, g1, -1.0, g2);
  const Radial pf = combine(0.0, gs, a1_, g1, a2_, g2);
  const cplx ks2 = wave_.k_s * wave_.k_s;

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) jet.u[i][j] = cU_ * (cd2(phi, x, i, j) + delta(i, j) * ks2 * gs.d[0]);
    jet.u[i][3] = -cp_ * cd1(psi, x, i);
  }
  for (int j = 0; j < 3; ++j) jet.p[j] = cp_ * cd1(psi, x, j);
  jet.p[3] = pf.d[0];
  if (depth < 1) return;

  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m < 3; ++m) {
      for (int j = 0; j < 3; ++j) {
        jet.du[i][m][j] = cU_ * (cd3(phi, x, i, j, m) + delta(i, j) * ks2 * cd1(gs, x, m));
      }
      jet.du[i][m][3] = -cp_ * cd2(psi, x, i, m);
    }
  }
  for (int m = 0; m < 3; ++m) {
    for (int j = 0; j < 3; ++j) jet.dp[m][j] = cp_ * cd2(psi, x, j, m);
    jet.dp[m][3] = cd1(pf, x, m);
  }
  if (depth < 2) return;

  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m < 3; ++m) {
      for (int l = 0; l < 3; ++l) {
        for (int j = 0; j < 3; ++j) {
          jet.ddu[i][m][l][j] = cU_ * (cd4(phi, x, i, j, m, l) + delta(i, j) * ks2 * cd2(gs, x, m, l));
        }
        jet.ddu[i][m][l][3] = -cp_ * cd3(psi, x, i, m, l);
      }
    }
  }
  for (int m = 0; m < 3; ++m) {
    for (int l = 0; l < 3; ++l) {
      for (int j = 0; j < 3; ++j) jet.ddp[m][l][j] = cp_ * cd3(psi, x, j, m, l);
      jet.ddp[m][l][3] = cd2(pf, x, m, l);
    }
  }
}

GreenTensor GreensKernel::tensor(const Vec3& y, const Vec3& xi) const {
  Jet jet;
  fill_jet(y, xi, 0, jet);
  GreenTensor G;
  for (int s = 0; s < 4; ++s) {
    for (int i = 0; i < 3; ++i) G(i, s) = jet.u[i][s];
    G(3, s) = jet.p[s];
  }
  return G;
}

namespace {

// Trace rows (t, q, p) of one source column given u, grad u, p, grad p.
// grad_u(i, k) = d u_i / d xi_k.
template <class U, class GU, class GP>
void trace_column(const MaterialParams& mp, double w2, cplx gamma, const Vec3& n, U u, GU grad_u, cplx p,
                  GP grad_p, TraceKernel& out, int s) {
  const cplx div = grad_u(0, 0) + grad_u(1, 1) + grad_u(2, 2);
  cplx dpn = 0.0;
  cplx un = 0.0;
  for (int i = 0; i < 3; ++i) {
    cplx shear = 0.0;
    for (int k = 0; k < 3; ++k) shear += n[k] * (grad_u(i, k) + grad_u(k, i));
    out(i, s) = mp.lambda * n[i] * div + mp.mu * shear - mp.alpha * p * n[i];
    dpn += n[i] * grad_p(i);
    un += n[i] * u(i);
  }
  out(3, s) = (dpn - mp.rho_f * w2 * un) / (gamma * w2);
  out(4, s) = p;
}

}  // namespace

TraceKernel GreensKernel::trace(const Vec3& y, const Vec3& xi, const Vec3& n) const {
  require_unit_normal(n);
  Jet jet;
  fill_jet(y, xi, 1, jet);
  const double w2 = wave_.omega * wave_.omega;
  TraceKernel T;
  for (int s = 0; s < 4; ++s) {
    trace_column(
        params_, w2, wave_.gamma, n, [&](int i) { return jet.u[i][s]; },
        [&](int i, int k) { return jet.du[i][k][s]; }, jet.p[s], [&](int i) { return jet.dp[i][s]; }, T, s);
  }
  return T;
}

std::array<TraceKernel, 3> GreensKernel::trace_gradient(const Vec3& y, const Vec3& xi, const Vec3& n) const {
  require_unit_normal(n);
  Jet jet;
  fill_jet(y, xi, 2, jet);
  const double w2 = wave_.omega * wave_.omega;
  std::array<TraceKernel, 3> out;
  for (int m = 0; m < 3; ++m) {
    for (int s = 0; s < 4; ++s) {
      trace_column(
          params_, w2, wave_.gamma, n, [&](int i) { return jet.du[i][m][s]; },
          [&](int i, int k) { return jet.ddu[i][k][m][s]; }, jet.dp[m][s],
          [&](int i) { return jet.ddp[i][m][s]; }, out[m], s);
    }
  }
  return out;
}

GreenTensor green_tensor(const Vec3& y, const Vec3& xi, const WaveState& wave, const MaterialParams& params) {
  return GreensKernel(wave, params).tensor(y, xi);
}

TraceKernel trace_kernel(const Vec3& y, const Vec3& xi, const Vec3& n, const WaveState& wave,
                         const MaterialParams& params) {
  return GreensKernel(wave, params).trace(y, xi, n);
}

}  // namespace poroscat
