#include "poroscat/forward.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "poroscat/errors.hpp"
#include "poroscat/parallel.hpp"

namespace poroscat {

std::vector<CellRef> flatten_cells(const std::vector<FracturePatch>& patches) {
  std::vector<CellRef> out;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    for (const Cell& c : patches[p].cells) out.push_back({c.center, patches[p].n, c.area, p});
  }
  return out;
}

TraceState incident_traces(const Vec3& y, int source, const std::vector<FracturePatch>& patches,
                           const GreensKernel& kernel, cplx amplitude) {
  if (source < 0 || source > 3) throw DomainError("source type must lie in 0..3");
  TraceState out;
  for (const CellRef& c : flatten_cells(patches)) {
    out.cells.push_back(amplitude * kernel.trace(y, c.center, c.n).col(source));
  }
  return out;
}

Mat5c local_closure_matrix(const FracturePatch& patch, double omega) {
  const ContactParams& cp = patch.contact;
  cp.validate();
  const bool high = cp.model == ContactModel::high_permeability;
  const double Pi = high ? 1.0 : cp.Pi;
  const cplx kn_eff = cp.normal_stiffness();
  const Eigen::Matrix3d tangential = patch.e1 * patch.e1.transpose() + patch.e2 * patch.e2.transpose();
  const Eigen::Matrix3d nn = patch.n * patch.n.transpose();
  const Eigen::Matrix3cd Kinv = tangential.cast<cplx>() / cp.k_t + nn.cast<cplx>() / kn_eff;

  Mat5c T = Mat5c::Zero();
  T.topLeftCorner<3, 3>() = Kinv;
  // K^{-1} alpha_tilde n = (alpha_f Pi / k_n) n, shared with the -[[q]] row.
  const Eigen::Vector3cd coupling = (cp.alpha_f * Pi / cp.k_n) * patch.n.cast<cplx>();
  T.block<3, 1>(0, 4) = coupling;
  T.block<1, 3>(4, 0) = coupling.transpose();
  T(4, 4) = Pi * cp.alpha_f / (cp.k_n * cp.beta_f);
  if (!high) T(3, 3) = kI * omega * Pi / cp.kappa_f;
  return T;
}

JumpState local_jump_solve(const TraceState& traces, const std::vector<FracturePatch>& patches, double omega) {
  JumpState out;
  std::size_t idx = 0;
  for (const FracturePatch& p : patches) {
    const Mat5c T = local_closure_matrix(p, omega);
    for (std::size_t c = 0; c < p.cells.size(); ++c, ++idx) {
      if (idx >= traces.cells.size()) throw CompatibilityError("trace state has fewer cells than the scene");
      out.cells.push_back(T * traces.cells[idx]);
    }
  }
  if (idx != traces.cells.size()) throw CompatibilityError("trace state has more cells than the scene");
  return out;
}

namespace {

// Traces at (x, n) of the field radiated by a unit density component k at cell
// c' (area included). The radiated field is u_r(x) = A TK(x, c', n')(k, r);
// d/dx of TK(x, .) is minus its gradient in the trace-point argument.
Mat5c scattered_trace_block(const GreensKernel& kernel, const CellRef& target, const CellRef& source) {
  const MaterialParams& mp = kernel.params();
  const WaveState& ws = kernel.wave();
  const double w2 = ws.omega * ws.omega;
  const TraceKernel value = kernel.trace(target.center, source.center, source.n);
  const std::array<TraceKernel, 3> grad = kernel.trace_gradient(target.center, source.center, source.n);
  const Vec3& n = target.n;
  Mat5c block;
  for (int k = 0; k < 5; ++k) {
    cplx u[3], du[3][3], p, dp[3];
    for (int r = 0; r < 3; ++r) {
      u[r] = source.area * value(k, r);
      for (int m = 0; m < 3; ++m) du[r][m] = -source.area * grad[m](k, r);
    }
    p = source.area * value(k, 3);
    for (int m = 0; m < 3; ++m) dp[m] = -source.area * grad[m](k, 3);
    const cplx div = du[0][0] + du[1][1] + du[2][2];
    cplx dpn = 0.0, un = 0.0;
    for (int i = 0; i < 3; ++i) {
      cplx shear = 0.0;
      for (int j = 0; j < 3; ++j) shear += n[j] * (du[i][j] + du[j][i]);
      block(i, k) = mp.lambda * n[i] * div + mp.mu * shear - mp.alpha * p * n[i];
      dpn += n[i] * dp[i];
      un += n[i] * u[i];
    }
    block(3, k) = (dpn - mp.rho_f * w2 * un) / (ws.gamma * w2);
    block(4, k) = p;
  }
  return block;
}

}  // namespace

CMatrix coupling_matrix(const std::vector<FracturePatch>& patches, const GreensKernel& kernel, double cutoff,
                        std::size_t* dropped_pairs) {
  const std::vector<CellRef> cells = flatten_cells(patches);
  const std::size_t nc = cells.size();
  const std::size_t np = patches.size();
  // Patch-pair coupling mask from the minimum cell-centre separation.
  std::vector<char> coupled(np * np, 1);
  std::size_t dropped = 0;
  if (cutoff > 0.0) {
    const double reach = cutoff / kernel.wave().min_attenuation();
    for (std::size_t a = 0; a < np; ++a) {
      for (std::size_t b = a + 1; b < np; ++b) {
        double dmin = std::numeric_limits<double>::infinity();
        for (const Cell& ca : patches[a].cells) {
          for (const Cell& cb : patches[b].cells) dmin = std::min(dmin, (ca.center - cb.center).norm());
        }
        if (dmin > reach) {
          coupled[a * np + b] = coupled[b * np + a] = 0;
          ++dropped;
        }
      }
    }
  }
  if (dropped_pairs) *dropped_pairs = dropped;
  CMatrix C = CMatrix::Zero(5 * nc, 5 * nc);
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      if (i == j || !coupled[cells[i].patch * np + cells[j].patch]) continue;
      C.block<5, 5>(5 * i, 5 * j) = scattered_trace_block(kernel, cells[i], cells[j]);
    }
  }
  return C;
}

namespace {

CMatrix block_local_T(const std::vector<FracturePatch>& patches, double omega) {
  std::size_t nc = 0;
  for (const auto& p : patches) nc += p.cells.size();
  CMatrix T = CMatrix::Zero(5 * nc, 5 * nc);
  std::size_t idx = 0;
  for (const auto& p : patches) {
    const Mat5c Tp = local_closure_matrix(p, omega);
    for (std::size_t c = 0; c < p.cells.size(); ++c, ++idx) T.block<5, 5>(5 * idx, 5 * idx) = Tp;
  }
  return T;
}

double rcond_of(const Eigen::PartialPivLU<CMatrix>& lu, const CMatrix& A) {
  return A.size() == 0 ? 1.0 : lu.rcond();
}

}  // namespace

JumpState interacting_jump_solve(const TraceState& traces, const std::vector<FracturePatch>& patches,
                                 const GreensKernel& kernel, double cutoff, InteractingReport* report) {
  const double omega = kernel.wave().omega;
  const CMatrix T = block_local_T(patches, omega);
  const std::size_t nc = static_cast<std::size_t>(T.rows()) / 5;
  if (traces.cells.size() != nc) throw CompatibilityError("trace state does not match the scene cells");
  CVector iota(5 * nc);
  for (std::size_t c = 0; c < nc; ++c) iota.segment<5>(5 * c) = traces.cells[c];
  InteractingReport rep;
  const CMatrix C = coupling_matrix(patches, kernel, cutoff, &rep.dropped_pairs);
  const CMatrix M = CMatrix::Identity(5 * nc, 5 * nc) - T * C;
  const CVector rhs = T * iota;
  Eigen::PartialPivLU<CMatrix> lu(M);
  rep.rcond = rcond_of(lu, M);
  if (!(rep.rcond > 1e-14)) {
    throw ConditioningError("interacting jump system is singular", rep.rcond > 0 ? 1.0 / rep.rcond : INFINITY);
  }
  const CVector a = lu.solve(rhs);
  const double rn = rhs.norm();
  rep.residual = rn > 0 ? (M * a - rhs).norm() / rn : (M * a).norm();
  if (report) *report = rep;
  JumpState out;
  for (std::size_t c = 0; c < nc; ++c) out.cells.push_back(a.segment<5>(5 * c));
  return out;
}

RadiatedField radiate(const JumpState& jumps, const std::vector<FracturePatch>& patches,
                      const std::vector<Vec3>& observers, const GreensKernel& kernel) {
  const std::vector<CellRef> cells = flatten_cells(patches);
  if (cells.size() != jumps.cells.size()) throw CompatibilityError("jump state does not match the scene cells");
  RadiatedField out;
  out.values.assign(observers.size(), Eigen::Vector4cd::Zero());
  for (std::size_t o = 0; o < observers.size(); ++o) {
    for (const FracturePatch& p : patches) {
      const double diam = std::hypot(2.0 * p.half1 / p.cells1, 2.0 * p.half2 / p.cells2);
      if (p.distance_to(observers[o]) < diam) {
        ++out.near_singular;
        break;
      }
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const TraceKernel K = kernel.trace(observers[o], cells[c].center, cells[c].n);
      out.values[o] += cells[c].area * (K.transpose() * jumps.cells[c]);
    }
  }
  return out;
}

SolveMode parse_solve_mode(const std::string& name) {
  if (name == "local") return SolveMode::local;
  if (name == "interacting") return SolveMode::interacting;
  throw ConfigurationError("unknown forward mode '" + name + "'");
}

std::string to_string(SolveMode mode) { return mode == SolveMode::local ? "local" : "interacting"; }

CMatrix trace_matrix(const FractureScene& scene, const GreensKernel& kernel, int threads) {
  const std::vector<CellRef> cells = flatten_cells(scene.patches);
  const SensingGrid& grid = scene.grid;
  const int nch = grid.num_channels();
  CMatrix S = CMatrix::Zero(5 * cells.size(), grid.dimension());
  // Columns of one grid point are written by exactly one worker.
  parallel_for(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const TraceKernel K = kernel.trace(grid.points[j], cells[c].center, cells[c].n);
        for (int s = 0; s < nch; ++s) S.block<5, 1>(5 * c, grid.index(j, s)) = K.col(grid.channels[s]);
      }
    }
  });
  return S;
}

CMatrix radiation_matrix(const FractureScene& scene, const GreensKernel& kernel, int threads) {
  const std::vector<CellRef> cells = flatten_cells(scene.patches);
  CMatrix R = trace_matrix(scene, kernel, threads).transpose();
  for (std::size_t c = 0; c < cells.size(); ++c) R.middleCols(5 * c, 5) *= cells[c].area;
  return R;
}

CMatrix local_T_matrix(const FractureScene& scene, double omega) { return block_local_T(scene.patches, omega); }

CMatrix interacting_T_matrix(const FractureScene& scene, const GreensKernel& kernel, double cutoff,
                             InteractingReport* report) {
  const CMatrix T = block_local_T(scene.patches, kernel.wave().omega);
  const Eigen::Index n = T.rows();
  InteractingReport rep;
  const CMatrix C = coupling_matrix(scene.patches, kernel, cutoff, &rep.dropped_pairs);
  const CMatrix M = CMatrix::Identity(n, n) - T * C;
  Eigen::PartialPivLU<CMatrix> lu(M);
  rep.rcond = rcond_of(lu, M);
  if (!(rep.rcond > 1e-14)) {
    throw ConditioningError("interacting jump system is singular", rep.rcond > 0 ? 1.0 / rep.rcond : INFINITY);
  }
  CMatrix Tint = lu.solve(T);
  const double tn = T.norm();
  rep.residual = tn > 0 ? (M * Tint - T).norm() / tn : 0.0;
  if (report) *report = rep;
  return Tint;
}

ScatteringMatrix assemble_lambda(const FractureScene& scene, const WaveState& wave, const MaterialParams& params,
                                 const ForwardOptions& options, InteractingReport* report) {
  scene.validate();
  ScatteringMatrix out;
  out.num_points = scene.grid.size();
  out.channels = scene.grid.channels;
  out.omega = wave.omega;
  const auto dim = static_cast<Eigen::Index>(scene.grid.dimension());
  if (scene.num_cells() == 0) {
    out.values = CMatrix::Zero(dim, dim);
    return out;
  }
  const GreensKernel kernel(wave, params);
  const CMatrix S = trace_matrix(scene, kernel, options.threads);
  CMatrix R = S.transpose();
  const std::vector<CellRef> cells = flatten_cells(scene.patches);
  for (std::size_t c = 0; c < cells.size(); ++c) R.middleCols(5 * c, 5) *= cells[c].area;
  const CMatrix T = options.mode == SolveMode::local
                        ? local_T_matrix(scene, wave.omega)
                        : interacting_T_matrix(scene, kernel, options.coupling_cutoff, report);
  out.values = R * (T * S);
  return out;
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

ScatteringMatrix inject_noise(const ScatteringMatrix& clean, const NoiseSpec& spec, std::uint64_t seed) {
  const CMatrix& L = clean.values;
  if (L.rows() != L.cols()) throw CompatibilityError("noise injection needs a square matrix");
  if (spec.epsilon && spec.target_delta) throw ConfigurationError("give either epsilon or target_delta, not both");
  ScatteringMatrix out = clean;
  out.provenance = "noisy";
  out.seed = seed;
  const double eps = spec.target_delta ? 1.0 : spec.epsilon.value_or(0.0);
  if (eps < 0.0 || (spec.target_delta && *spec.target_delta < 0.0)) {
    throw DomainError("noise level must be non-negative");
  }
  const Eigen::Index n = L.rows();
  CMatrix N(n, n);
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = eps * (2.0 * unit_uniform(rng()) - 1.0);
      const double im = eps * (2.0 * unit_uniform(rng()) - 1.0);
      N(i, j) = cplx(re, im);
    }
  }
  CMatrix NL = N * L;
  double scale = 1.0;
  if (spec.target_delta) {
    const double base = spectral_norm(NL);
    if (*spec.target_delta == 0.0 || base == 0.0) {
      scale = 0.0;
    } else {
      scale = *spec.target_delta / base;
    }
    NL *= scale;
  }
  out.epsilon = eps * scale;
  out.values = L + NL;
  out.delta = spectral_norm(out.values - L);
  return out;
}

Mat5c admissibility_map(const ContactParams& cp, const Vec3& e1, const Vec3& e2, const Vec3& n, double omega) {
  cp.validate();
  const bool high = cp.model == ContactModel::high_permeability;
  const double Pi = high ? 1.0 : cp.Pi;
  const cplx at = cp.alpha_tilde();
  const Eigen::Matrix3cd K = cp.k_t * (e1 * e1.transpose() + e2 * e2.transpose()).cast<cplx>() +
                             cp.normal_stiffness() * (n * n.transpose()).cast<cplx>();
  const Eigen::Vector3cd nc = n.cast<cplx>();
  const cplx denom = 1.0 - at * cp.beta_f;
  if (std::abs(denom) < 1e-14) throw DegenerateContactError("1 - alpha_tilde beta_f vanishes");
  // p_tot = [(k_n beta/(Pi alpha)) phi5 - beta n.K[[u]]] / (1 - alpha_tilde beta)
  Eigen::Matrix<cplx, 1, 5> prow = Eigen::Matrix<cplx, 1, 5>::Zero();
  prow.head<3>() = -(cp.beta_f / denom) * (nc.transpose() * K);
  prow(4) = cp.k_n * cp.beta_f / (Pi * cp.alpha_f) / denom;
  Mat5c P = Mat5c::Zero();
  P.topLeftCorner<3, 3>() = K;
  P.topRows<3>() -= at * nc * prow;
  if (!high) P(3, 3) = cp.kappa_f / (kI * omega * Pi);
  P.row(4) = prow;
  return P;
}

AdmissibilityReport check_admissibility(const ContactParams& contact, double omega, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("admissibility trials must be >= 1");
  const Mat5c P = admissibility_map(contact, Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), omega);
  const bool high = contact.model == ContactModel::high_permeability;
  std::mt19937_64 rng(seed);
  AdmissibilityReport rep;
  rep.trials = trials;
  rep.worst_imag = -std::numeric_limits<double>::infinity();
  const double pnorm = P.norm();
  rep.tolerance = 1e-12 * std::max(1.0, pnorm);
  for (int t = 0; t < trials; ++t) {
    Vec5c phi;
    for (int k = 0; k < 5; ++k) {
      const double re = 2.0 * unit_uniform(rng()) - 1.0;
      const double im = 2.0 * unit_uniform(rng()) - 1.0;
      phi(k) = cplx(re, im);
    }
    // No pressure jump across a highly permeable interface.
    if (high) phi(3) = 0.0;
    const double nrm2 = phi.squaredNorm();
    if (nrm2 == 0.0) continue;
    const double im = phi.dot(P * phi).imag() / nrm2;  // dot conjugates its first argument
    rep.worst_imag = std::max(rep.worst_imag, im);
  }
  rep.admissible = rep.worst_imag <= rep.tolerance;
  return rep;
}

}  // namespace poroscat
