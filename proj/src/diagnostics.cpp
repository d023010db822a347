#include "poroscat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace poroscat {

namespace {

constexpr double kD1[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};

}  // namespace

Eigen::Vector4d biot_residual(const GreensKernel& kernel, const Vec3& y, const Vec3& xi, double h) {
  const MaterialParams& mp = kernel.params();
  const WaveState& ws = kernel.wave();
  const double w2 = ws.omega * ws.omega;
  const cplx rho_t = mp.rho - mp.rho_f * mp.rho_f / ws.gamma;
  const cplx beta = mp.alpha - mp.rho_f / ws.gamma;

  // Second derivatives d_i d_j G by nesting the 5-point first-derivative stencil.
  GreenTensor hess[3][3];
  GreenTensor grad[3];
  for (int i = 0; i < 3; ++i) {
    grad[i].setZero();
    for (int j = 0; j < 3; ++j) hess[i][j].setZero();
  }
  for (int i = 0; i < 3; ++i) {
    for (int a = 0; a < 5; ++a) {
      if (kD1[a] == 0.0) continue;
      Vec3 xa = xi;
      xa[i] += (a - 2) * h;
      grad[i] += (kD1[a] / h) * kernel.tensor(y, xa);
      for (int j = i; j < 3; ++j) {
        for (int b = 0; b < 5; ++b) {
          if (kD1[b] == 0.0) continue;
          Vec3 xb = xa;
          xb[j] += (b - 2) * h;
          hess[i][j] += (kD1[a] * kD1[b] / (h * h)) * kernel.tensor(y, xb);
        }
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) hess[i][j] = hess[j][i];
  }
  const GreenTensor G = kernel.tensor(y, xi);

  Eigen::Vector4d out;
  for (int s = 0; s < 4; ++s) {
    Eigen::Vector4cd res = Eigen::Vector4cd::Zero();
    double scale = 0.0;
    cplx div = 0.0;
    for (int l = 0; l < 3; ++l) div += grad[l](l, s);
    for (int i = 0; i < 3; ++i) {
      cplx grad_div = 0.0, lap = 0.0;
      for (int l = 0; l < 3; ++l) {
        grad_div += hess[i][l](l, s);
        lap += hess[l][l](i, s);
      }
      const cplx t1 = (mp.lambda + mp.mu) * grad_div;
      const cplx t2 = mp.mu * lap;
      const cplx t3 = -beta * grad[i](3, s);
      const cplx t4 = w2 * rho_t * G(i, s);
      res(i) = t1 + t2 + t3 + t4;
      scale = std::max({scale, std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4)});
    }
    cplx lap_p = 0.0;
    for (int l = 0; l < 3; ++l) lap_p += hess[l][l](3, s);
    const cplx q1 = lap_p / (ws.gamma * w2);
    const cplx q2 = G(3, s) / mp.M;
    const cplx q3 = beta * div;
    res(3) = q1 + q2 + q3;
    // The pressure equation is weighted like the momentum equation.
    const double pscale = std::max({std::abs(q1), std::abs(q2), std::abs(q3)});
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r = std::max(r, std::abs(res(i)) / scale);
    r = std::max(r, std::abs(res(3)) / pscale);
    out(s) = r;
  }
  return out;
}

double adjoint_identity_error(const FractureScene& scene, const WaveState& wave, const MaterialParams& params,
                              std::uint64_t seed) {
  const GreensKernel kernel(wave, params);
  const WaveState conj_wave = solve_dispersion_with_gamma(params, wave.omega, std::conj(wave.gamma));
  const GreensKernel conj_kernel(conj_wave, params);
  const CMatrix S = trace_matrix(scene, kernel, 1);
  const CMatrix Rc = radiation_matrix(scene, conj_kernel, 1);
  const std::vector<CellRef> cells = flatten_cells(scene.patches);
  std::mt19937_64 rng(seed);
  auto draw = [&] { return 2.0 * unit_uniform(rng()) - 1.0; };
  CVector g(S.cols()), a(S.rows());
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = cplx(draw(), draw());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cplx(draw(), draw());
  const CVector Sg = S * g;
  cplx lhs = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    lhs += cells[c].area * a.segment<5>(5 * c).dot(Sg.segment<5>(5 * c));
  }
  const cplx rhs = (Rc * a).dot(g);
  return std::abs(lhs - rhs) / std::abs(lhs);
}

double factorization_error(const FractureScene& scene, const WaveState& wave, const MaterialParams& params,
                           const CMatrix& lambda) {
  const GreensKernel kernel(wave, params);
  const SensingGrid& grid = scene.grid;
  CMatrix direct(lambda.rows(), lambda.cols());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (int s = 0; s < grid.num_channels(); ++s) {
      const TraceState tr = incident_traces(grid.points[j], grid.channels[s], scene.patches, kernel);
      const JumpState js = local_jump_solve(tr, scene.patches, wave.omega);
      const RadiatedField f = radiate(js, scene.patches, grid.points, kernel);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int r = 0; r < grid.num_channels(); ++r) {
          direct(static_cast<Eigen::Index>(grid.index(i, r)), static_cast<Eigen::Index>(grid.index(j, s))) =
              f.values[i](grid.channels[r]);
        }
      }
    }
  }
  const double nrm = lambda.norm();
  return nrm > 0.0 ? (lambda - direct).norm() / nrm : direct.norm();
}

double conjugate_form_error(const FractureScene& scene, const WaveState& wave, const MaterialParams& params) {
  const GreensKernel kernel(wave, params);
  const GreensKernel conj_kernel(conjugate_continued(wave), params);
  const CMatrix S = trace_matrix(scene, kernel);
  const CMatrix T = local_T_matrix(scene, wave.omega);
  const CMatrix lambda = radiation_matrix(scene, kernel) * T * S;
  const double nl = lambda.norm();
  if (nl == 0.0) return 0.0;
  // The continued slow wave grows like exp(Im(k) r); overflow means the form does not exist.
  const double err = (lambda - radiation_matrix(scene, conj_kernel) * T * S).norm() / nl;
  return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
}

LocalizationStats localization_stats(const IndicatorMap& map, const FractureScene& scene, double far_distance) {
  LocalizationStats st;
  const SamplingGrid& g = map.grid;
  const double cell = std::max(g.dx(), g.dy());
  const double on_radius = 0.5 * std::hypot(g.dx(), g.dy());
  auto nearest = [&](const Vec3& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const FracturePatch& p : scene.patches) d = std::min(d, p.distance_to(x));
    return d;
  };
  std::size_t peak = 0;
  double best = -1.0;
  double on_sum = 0.0, far_sum = 0.0;
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    const double v = map.normalized[i];
    if (!std::isfinite(v)) continue;
    if (v > best) {
      best = v;
      peak = i;
    }
    const double d = nearest(g.point(i));
    if (d <= on_radius) {
      on_sum += v;
      ++st.on_count;
    } else if (d > far_distance) {
      far_sum += v;
      ++st.far_count;
    }
  }
  st.peak_distance = nearest(g.point(peak));
  st.peak_cells = st.peak_distance / cell;
  st.on_mean = st.on_count ? on_sum / static_cast<double>(st.on_count) : 0.0;
  st.far_mean = st.far_count ? far_sum / static_cast<double>(st.far_count) : 0.0;
  st.contrast = st.far_mean > 0.0 ? st.on_mean / st.far_mean : std::numeric_limits<double>::infinity();
  return st;
}

}  // namespace poroscat
