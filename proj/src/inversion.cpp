#include "poroscat/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "poroscat/errors.hpp"
#include "poroscat/parallel.hpp"
#include "poroscat/simd/kernels.hpp"

namespace poroscat {

TrialPattern trial_pattern(const Vec3& x, const Vec3& n, int iota, const SensingGrid& grid,
                           const GreensKernel& kernel) {
  if (iota != 0 && iota != 1) throw DomainError("excitation type must be 0 or 1");
  TrialPattern tp{x, n, iota, CVector::Zero(static_cast<Eigen::Index>(grid.dimension()))};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const TraceKernel K = kernel.trace(grid.points[j], x, n);
    for (int s = 0; s < grid.num_channels(); ++s) {
      const int r = grid.channels[s];
      tp.phi(static_cast<Eigen::Index>(grid.index(j, s))) =
          iota == 1 ? n[0] * K(0, r) + n[1] * K(1, r) + n[2] * K(2, r) : K(4, r);
    }
  }
  return tp;
}

namespace {

// |H| = V |D| V* for Hermitian H.
CMatrix hermitian_abs(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

LambdaSharp lambda_sharp_decomposition(const CMatrix& L) {
  if (L.rows() != L.cols()) throw DomainError("lambda_sharp needs a square matrix");
  LambdaSharp out;
  if (L.size() == 0) return out;
  const CMatrix La = L.adjoint();
  const CMatrix re = 0.5 * (L + La);
  const CMatrix im = (L - La) / cplx(0.0, 2.0);
  CMatrix S = hermitian_abs(re) + hermitian_abs(im);
  S = 0.5 * (S + S.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  RVector lam = es.eigenvalues();
  const double top = std::max(0.0, lam.maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < 1e-14 * top) lam(i) = 0.0;
  }
  out.vectors = es.eigenvectors();
  out.values = lam;
  out.matrix = out.vectors * lam.asDiagonal() * out.vectors.adjoint();
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

CMatrix lambda_sharp(const CMatrix& L) { return lambda_sharp_decomposition(L).matrix; }

SpectralCache::SpectralCache(const CMatrix& L) {
  if (L.size() == 0) return;
  Eigen::BDCSVD<CMatrix> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  U = svd.matrixU();
  V = svd.matrixV();
  s = svd.singularValues();
  s2 = s.cwiseAbs2();
  norm = s.size() ? s(0) : 0.0;
}

CVector tikhonov_solve(const SpectralCache& svd, const CVector& phi, double eta) {
  if (!(eta > 0.0)) throw DomainError("Tikhonov parameter eta must be positive");
  if (phi.size() != svd.U.rows()) throw CompatibilityError("right-hand side length mismatch");
  const CVector c = svd.U.adjoint() * phi;
  CVector y(c.size());
  simd::filter_scale(svd.s.data(), svd.s2.data(), c.data(), eta, y.data(), static_cast<std::size_t>(c.size()));
  return svd.V * y;
}

CVector tikhonov_solve(const CMatrix& L, const CVector& phi, double eta) {
  if (!(eta > 0.0)) throw DomainError("Tikhonov parameter eta must be positive");
  return tikhonov_solve(SpectralCache(L), phi, eta);
}

MorozovResult morozov_from_coefficients(const SpectralCache& svd, const RVector& c_abs2, double tail_sq,
                                        double delta, const EtaBracket& bracket) {
  if (!(delta > 0.0)) throw DomainError("Morozov principle needs delta > 0");
  if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo)) throw DomainError("eta bracket must satisfy 0 < lo < hi");
  const std::size_t n = static_cast<std::size_t>(c_abs2.size());
  MorozovResult out;
  auto eval = [&](double eta) {
    const simd::SpectralSums sums = simd::spectral_sums(svd.s2.data(), c_abs2.data(), n, eta);
    out.residual = std::sqrt(sums.residual_sq + tail_sq);
    out.solution_norm = std::sqrt(sums.solution_sq);
    return out.residual - delta * out.solution_norm;
  };
  // Discrepancy is increasing in eta.
  const double f_lo = eval(bracket.lo);
  if (f_lo >= 0.0) {
    out.eta = bracket.lo;
    out.bracketed = f_lo == 0.0;
    return out;
  }
  const double f_hi = eval(bracket.hi);
  if (f_hi <= 0.0) {
    out.eta = bracket.hi;
    out.bracketed = f_hi == 0.0;
    return out;
  }
  double a = std::log(bracket.lo);
  double b = std::log(bracket.hi);
  for (;;) {
    const double m = 0.5 * (a + b);
    if (!(m > a && m < b)) break;
    ++out.iterations;
    const double f = eval(std::exp(m));
    if (f == 0.0) {
      a = b = m;
      break;
    }
    (f < 0.0 ? a : b) = m;
  }
  out.eta = std::exp(0.5 * (a + b));
  eval(out.eta);
  out.bracketed = true;
  return out;
}

namespace {

void coefficients(const SpectralCache& svd, const CVector& phi, RVector& c_abs2, double& tail_sq) {
  if (phi.size() != svd.U.rows()) throw CompatibilityError("right-hand side length mismatch");
  const double phi2 = simd::complex_norm_sq(phi.data(), static_cast<std::size_t>(phi.size()));
  if (!(phi2 > 0.0)) throw DomainError("right-hand side is zero");
  const CVector c = svd.U.adjoint() * phi;
  c_abs2 = c.cwiseAbs2();
  tail_sq = std::max(0.0, phi2 - c_abs2.sum());
}

}  // namespace

MorozovResult morozov_eta(const SpectralCache& svd, const CVector& phi, double delta, const EtaBracket& bracket) {
  if (phi.size() == 0) throw DomainError("right-hand side is empty");
  RVector c2;
  double tail = 0.0;
  coefficients(svd, phi, c2, tail);
  return morozov_from_coefficients(svd, c2, tail, delta, bracket);
}

MorozovResult morozov_eta(const CMatrix& L, const CVector& phi, double delta, const EtaBracket& bracket) {
  if (phi.size() == 0) throw DomainError("right-hand side is empty");
  return morozov_eta(SpectralCache(L), phi, delta, bracket);
}

CVector glsm_solve(const CMatrix& L, const CMatrix& sharp, const CVector& phi, double alpha, double delta) {
  if (!(alpha >= 0.0)) throw DomainError("GLSM alpha must be non-negative");
  if (!(delta >= 0.0)) throw DomainError("GLSM delta must be non-negative");
  CMatrix A = L.adjoint() * L + alpha * sharp;
  A.diagonal().array() += alpha * delta;
  Eigen::LLT<CMatrix> llt(A);
  const double rc = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (!(rc > 1e-15)) {
    throw ConditioningError("GLSM system is singular", rc > 0 ? 1.0 / rc : INFINITY);
  }
  return llt.solve(L.adjoint() * phi);
}

double glsm_alpha(double eta, double norm_L, double delta) {
  const double denom = norm_L + delta;
  if (!(denom > 0.0)) throw DomainError("alpha rule needs |L| + delta > 0");
  return eta / denom;
}

double glsm_indicator_value(const CMatrix& sharp, const CVector& g, double delta) {
  const double energy = g.dot(sharp * g).real() + delta * g.squaredNorm();
  return 1.0 / std::sqrt(energy);
}

GlsmBatch::GlsmBatch(const CMatrix& L, const CMatrix& sharp, double delta) {
  if (!(delta > 0.0)) throw DomainError("batched GLSM needs delta > 0");
  CMatrix B = sharp;
  B.diagonal().array() += delta;
  const CMatrix A = L.adjoint() * L;
  Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ges(A, B, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) throw NumericalError("generalized eigendecomposition failed");
  V_ = ges.eigenvectors();
  d_ = ges.eigenvalues();
  P_ = V_.adjoint() * L.adjoint();
}

CVector GlsmBatch::solve(const CVector& phi, double alpha) const {
  CVector y = P_ * phi;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) /= (d_(i) + alpha);
  return V_ * y;
}

void GlsmBatch::evaluate(const CVector& phi, double alpha, double& g_norm, double& value) const {
  CVector y = P_ * phi;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) /= (d_(i) + alpha);
  // V is B-orthonormal, so g* B g = |y|^2.
  value = 1.0 / std::sqrt(simd::complex_norm_sq(y.data(), static_cast<std::size_t>(y.size())));
  const CVector g = V_ * y;
  g_norm = std::sqrt(simd::complex_norm_sq(g.data(), static_cast<std::size_t>(g.size())));
}

Method parse_method(const std::string& name) {
  if (name == "lsm") return Method::lsm;
  if (name == "glsm") return Method::glsm;
  throw ConfigurationError("unknown inversion method '" + name + "'");
}

std::string to_string(Method m) { return m == Method::lsm ? "lsm" : "glsm"; }

AlphaPolicy parse_alpha_policy(const std::string& name) {
  if (name == "per_point") return AlphaPolicy::per_point;
  if (name == "fixed") return AlphaPolicy::fixed;
  throw ConfigurationError("unknown alpha policy '" + name + "'");
}

std::string to_string(AlphaPolicy p) { return p == AlphaPolicy::per_point ? "per_point" : "fixed"; }

IndicatorResult lsm_indicator_at(const std::vector<CVector>& candidates, const SpectralCache& svd, double delta,
                                 const EtaBracket& bracket) {
  if (candidates.empty()) throw DomainError("candidate list is empty");
  IndicatorResult best;
  best.g_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const MorozovResult mr = morozov_eta(svd, candidates[i], delta, bracket);
    if (mr.solution_norm < best.g_norm) {
      best.g_norm = mr.solution_norm;
      best.candidate = static_cast<int>(i);
    }
  }
  best.value = 1.0 / best.g_norm;
  return best;
}

IndicatorResult glsm_indicator_at(const std::vector<CVector>& candidates, const CMatrix& L,
                                  const SpectralCache& svd, const CMatrix& sharp, double delta,
                                  const EtaBracket& bracket) {
  if (candidates.empty()) throw DomainError("candidate list is empty");
  IndicatorResult best;
  best.g_norm = std::numeric_limits<double>::infinity();
  CVector best_g;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const MorozovResult mr = morozov_eta(svd, candidates[i], delta, bracket);
    const CVector g = glsm_solve(L, sharp, candidates[i], glsm_alpha(mr.eta, svd.norm, delta), delta);
    const double gn = g.norm();
    if (gn < best.g_norm) {
      best.g_norm = gn;
      best.candidate = static_cast<int>(i);
      best_g = g;
    }
  }
  best.value = glsm_indicator_value(sharp, best_g, delta);
  return best;
}

double effective_delta(double data_delta, double norm_L, double floor_relative) {
  return std::max(data_delta, floor_relative * norm_L);
}

namespace {

struct PointWork {
  // Candidate k = normal * n_iota + iota slot; patterns of iota = 0 are shared.
  std::vector<CVector> patterns;
  std::vector<int> pattern_of;
};

PointWork point_patterns(const Vec3& x, const SamplingGrid& sg, const SensingGrid& grid, const GreensKernel& kernel) {
  PointWork w;
  int shared_monopole = -1;
  for (std::size_t ni = 0; ni < sg.normals.size(); ++ni) {
    for (int iota : sg.iotas) {
      if (iota == 0 && shared_monopole >= 0) {
        w.pattern_of.push_back(shared_monopole);
        continue;
      }
      w.patterns.push_back(trial_pattern(x, sg.normals[ni], iota, grid, kernel).phi);
      w.pattern_of.push_back(static_cast<int>(w.patterns.size()) - 1);
      if (iota == 0) shared_monopole = w.pattern_of.back();
    }
  }
  return w;
}

}  // namespace

IndicatorMap indicator_map(const SensingGrid& grid, const ScatteringMatrix& data, const GreensKernel& kernel,
                           const SamplingGrid& sampling, const InversionOptions& options) {
  const CMatrix& L = data.values;
  if (L.rows() != L.cols() || static_cast<std::size_t>(L.rows()) != grid.dimension() ||
      data.channels != grid.channels) {
    throw CompatibilityError("scattering matrix does not match the sensing grid");
  }
  if (sampling.normals.empty() || sampling.iotas.empty()) throw ConfigurationError("no trial candidates");
  const std::size_t np = sampling.num_points();
  IndicatorMap map;
  map.grid = sampling;
  map.method = options.method;
  map.omega = kernel.wave().omega;
  map.raw.assign(np, std::numeric_limits<double>::quiet_NaN());
  map.normalized.assign(np, std::numeric_limits<double>::quiet_NaN());
  map.normal_index.assign(np, -1);
  map.iota.assign(np, -1);

  const SpectralCache svd(L);
  if (!(svd.norm > 0.0)) {
    map.degenerate = true;
    map.warnings.push_back("scattering operator is zero; every regularized solution vanishes");
    std::fill(map.raw.begin(), map.raw.end(), 0.0);
    std::fill(map.normalized.begin(), map.normalized.end(), 0.0);
    return map;
  }
  const double delta = effective_delta(data.delta, svd.norm, options.delta_floor);
  map.delta = delta;
  const EtaBracket bracket{options.eta_bracket_relative.lo * svd.norm * svd.norm,
                           options.eta_bracket_relative.hi * svd.norm * svd.norm};
  const std::size_t n_iota = sampling.iotas.size();

  std::unique_ptr<GlsmBatch> batch;
  double fixed_alpha = -1.0;
  if (options.method == Method::glsm) {
    const cplx g = kernel.wave().gamma;
    if (std::abs(g.imag()) > 1e-6 * std::abs(g)) {
      map.warnings.push_back("GLSM requested with complex gamma: the data operator is not normal");
    }
    batch = std::make_unique<GlsmBatch>(L, lambda_sharp(L), delta);
    if (options.alpha_policy == AlphaPolicy::fixed) {
      std::vector<double> etas(np, std::numeric_limits<double>::quiet_NaN());
      parallel_for(np, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
          try {
            const PointWork w = point_patterns(sampling.point(p), sampling, grid, kernel);
            std::vector<double> local;
            for (const CVector& phi : w.patterns) local.push_back(morozov_eta(svd, phi, delta, bracket).eta);
            std::nth_element(local.begin(), local.begin() + local.size() / 2, local.end());
            etas[p] = local[local.size() / 2];
          } catch (const Error&) {
          }
        }
      });
      std::vector<double> finite;
      for (double e : etas) {
        if (std::isfinite(e)) finite.push_back(e);
      }
      if (finite.empty()) throw NumericalError("no sampling point produced a Morozov parameter");
      std::nth_element(finite.begin(), finite.begin() + finite.size() / 2, finite.end());
      fixed_alpha = glsm_alpha(finite[finite.size() / 2], svd.norm, delta);
    }
  }

  parallel_for(np, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      try {
        const PointWork w = point_patterns(sampling.point(p), sampling, grid, kernel);
        std::vector<double> gnorm(w.patterns.size()), value(w.patterns.size());
        for (std::size_t k = 0; k < w.patterns.size(); ++k) {
          const CVector& phi = w.patterns[k];
          if (options.method == Method::lsm) {
            const MorozovResult mr = morozov_eta(svd, phi, delta, bracket);
            gnorm[k] = mr.solution_norm;
            value[k] = 1.0 / mr.solution_norm;
          } else {
            const double alpha =
                fixed_alpha > 0.0 ? fixed_alpha : glsm_alpha(morozov_eta(svd, phi, delta, bracket).eta, svd.norm, delta);
            batch->evaluate(phi, alpha, gnorm[k], value[k]);
          }
        }
        // Deterministic candidate order; ties keep the first candidate.
        int best = -1;
        for (std::size_t c = 0; c < w.pattern_of.size(); ++c) {
          if (best < 0 || gnorm[w.pattern_of[c]] < gnorm[w.pattern_of[best]]) best = static_cast<int>(c);
        }
        map.raw[p] = value[w.pattern_of[best]];
        map.normal_index[p] = best / static_cast<int>(n_iota);
        map.iota[p] = sampling.iotas[best % n_iota];
      } catch (const Error&) {
        // Missing value; recorded as NaN.
      }
    }
  });

  double top = 0.0;
  for (double v : map.raw) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  map.raw_max = top;
  for (std::size_t p = 0; p < np; ++p) map.normalized[p] = top > 0.0 ? map.raw[p] / top : map.raw[p];
  return map;
}

}  // namespace poroscat
