#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "poroscat/diagnostics.hpp"
#include "poroscat/errors.hpp"
#include "poroscat/forward.hpp"
#include "poroscat/matrix_io.hpp"

using namespace poroscat;

namespace {

MaterialParams lossy_params() {
  MaterialParams p = reference_params();
  p.kappa = 0.05;
  return p;
}

ContactParams soft_contact() {
  ContactParams c;
  c.k_t = {0.5, 0.02};
  c.k_n = {0.8, 0.01};
  c.kappa_f = 0.3;
  c.Pi = 0.7;
  return c;
}

FractureScene small_scene(ChannelSet set = ChannelSet::full) {
  FractureScene s;
  s.patches.push_back(build_ribbon_patch(Vec3(0.2, 0.1, 0), 1.2, 0.3 * kPi, 0.6, 4, 2, soft_contact()));
  s.patches.push_back(build_ribbon_patch(Vec3(-1.0, -0.8, 0.1), 0.8, 0.8 * kPi, 0.5, 3, 2, soft_contact()));
  s.grid = build_sensing_grid({{Vec3(-3, -3, 0), Vec3(-3, 3, 0)}, {Vec3(3, -3, 0.2), Vec3(3, 3, 0)}}, 4, set);
  return s;
}

double rel(const auto& a, const auto& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

Vec5c random5(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec5c v;
  for (int i = 0; i < 5; ++i) v(i) = cplx(u(rng), u(rng));
  return v;
}

}  // namespace

TEST(IncidentTraces, ZeroAmplitudeGivesZero) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FractureScene s = small_scene();
  const TraceState t = incident_traces(Vec3(-3, 0, 0), 1, s.patches, k, 0.0);
  for (const Vec5c& c : t.cells) EXPECT_EQ(c.norm(), 0.0);
}

TEST(IncidentTraces, MatchKernelColumns) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FractureScene s = small_scene();
  const Vec3 y(-3, 1, 0);
  const std::vector<CellRef> cells = flatten_cells(s.patches);
  for (int src = 0; src < 4; ++src) {
    const TraceState t = incident_traces(y, src, s.patches, k, cplx(2.0, -1.0));
    ASSERT_EQ(t.cells.size(), cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const TraceKernel K = k.trace(y, cells[c].center, cells[c].n);
      EXPECT_LT(rel(t.cells[c], Vec5c(cplx(2.0, -1.0) * K.col(src))), 1e-15);
      if (src == 3) {
        // Fluid source: pressure trace is p^f of the tensor.
        EXPECT_EQ(t.cells[c](4), cplx(2.0, -1.0) * k.tensor(y, cells[c].center)(3, 3));
      }
    }
  }
}

TEST(IncidentTraces, SourceOnPatchRaises) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FractureScene s = small_scene();
  EXPECT_THROW(incident_traces(s.patches[0].cells[0].center, 0, s.patches, k), SingularityError);
}

TEST(LocalClosure, ZeroTracesGiveZeroJumps) {
  const FractureScene s = small_scene();
  TraceState t;
  t.cells.assign(s.num_cells(), Vec5c::Zero());
  for (const Vec5c& a : local_jump_solve(t, s.patches, 2.0).cells) EXPECT_EQ(a.norm(), 0.0);
}

TEST(LocalClosure, ScalarStiffness) {
  ContactParams c;
  c.model = ContactModel::high_permeability;
  c.k_t = c.k_n = 2.5;
  const FracturePatch patch = build_ribbon_patch(Vec3::Zero(), 1.0, 0.4, 1.0, 1, 1, c);
  TraceState t;
  Vec5c in = Vec5c::Zero();
  in.head<3>() << cplx(1, 2), cplx(-3, 0.5), cplx(0.25, 0);
  t.cells = {in};
  const Vec5c a = local_jump_solve(t, {patch}, 2.0).cells[0];
  EXPECT_LT(rel(Eigen::Vector3cd(a.head<3>()), Eigen::Vector3cd(in.head<3>() / 2.5)), 1e-15);
}

TEST(LocalClosure, InterfaceConditionResidual) {
  std::mt19937_64 rng(11);
  for (ContactModel model : {ContactModel::finite_permeability, ContactModel::high_permeability}) {
    ContactParams c = soft_contact();
    c.model = model;
    const FracturePatch patch = build_ribbon_patch(Vec3::Zero(), 1.0, 0.37, 1.0, 1, 1, c);
    const double omega = 2.3;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec5c in = random5(rng);
      TraceState t;
      t.cells = {in};
      const Vec5c a = local_jump_solve(t, {patch}, omega).cells[0];
      const Eigen::Vector3cd n = patch.n.cast<cplx>();
      const double Pi = model == ContactModel::high_permeability ? 1.0 : c.Pi;
      const Eigen::Matrix3cd K = c.k_t * (patch.e1 * patch.e1.transpose() + patch.e2 * patch.e2.transpose()).cast<cplx>() +
                                 c.alpha_tilde() * c.k_n / (c.alpha_f * Pi) * (n * n.transpose());
      const Eigen::Vector3cd ti = in.head<3>();
      const cplx qi = in(3), pi = in(4);
      const cplx jq = -a(4);
      // Scattered traces and means set to zero in the three interface rows.
      const Eigen::Vector3cd r1 = K * a.head<3>() - ti - c.alpha_tilde() * pi * n;
      const cplx r2 = -c.k_n * c.beta_f / (Pi * c.alpha_f) * jq - pi - c.beta_f * (ti.transpose() * n)(0);
      const double scale = ti.norm() + std::abs(pi) + std::abs(qi);
      EXPECT_LT(r1.norm(), 1e-12 * scale);
      EXPECT_LT(std::abs(r2), 1e-12 * scale);
      if (model == ContactModel::finite_permeability) {
        const cplx r3 = c.kappa_f / (kI * omega * Pi) * a(3) - qi;
        EXPECT_LT(std::abs(r3), 1e-12 * scale);
      } else {
        EXPECT_EQ(a(3), cplx(0.0));
      }
    }
  }
}

TEST(LocalClosure, ZeroStiffnessRaises) {
  ContactParams c;
  c.k_t = 0.0;
  const FracturePatch patch = build_ribbon_patch(Vec3::Zero(), 1.0, 0.0, 1.0, 1, 1, ContactParams{});
  FracturePatch bad = patch;
  bad.contact = c;
  EXPECT_THROW(local_closure_matrix(bad, 1.0), DegenerateContactError);
}

TEST(InteractingSolve, SingleCellEqualsLocal) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const std::vector<FracturePatch> patches{build_ribbon_patch(Vec3::Zero(), 1.0, 0.2, 0.5, 1, 1, soft_contact())};
  const TraceState t = incident_traces(Vec3(2, 1, 0), 0, patches, k);
  const JumpState a = local_jump_solve(t, patches, k.wave().omega);
  const JumpState b = interacting_jump_solve(t, patches, k, 30.0);
  EXPECT_EQ(a.cells[0], b.cells[0]);
}

TEST(InteractingSolve, DistantPatchesDecouple) {
  // Lossy background so the coupling decays over 10^3 shear wavelengths.
  const MaterialParams p = lossy_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const GreensKernel k(ws, p);
  const double sep = 1e3 * 2.0 * kPi / ws.k_s.real();
  const std::vector<FracturePatch> patches{
      build_ribbon_patch(Vec3::Zero(), 1.0, 0.2, 0.5, 1, 1, soft_contact()),
      build_ribbon_patch(Vec3(sep, 0, 0), 1.0, 0.7, 0.5, 1, 1, soft_contact())};
  const TraceState t = incident_traces(Vec3(0, 2, 0), 1, patches, k);
  InteractingReport rep;
  const JumpState full = interacting_jump_solve(t, patches, k, 0.0, &rep);
  EXPECT_EQ(rep.dropped_pairs, 0u);
  const JumpState local = local_jump_solve(t, patches, ws.omega);
  EXPECT_LT(rel(full.cells[0], local.cells[0]), 1e-6);
  // A cutoff shorter than the separation drops the pair outright.
  interacting_jump_solve(t, patches, k, 0.5 * sep * ws.min_attenuation(), &rep);
  EXPECT_EQ(rep.dropped_pairs, 1u);
}

TEST(InteractingSolve, SystemResidual) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FractureScene s = small_scene();
  const TraceState t = incident_traces(Vec3(-3, 1, 0), 3, s.patches, k);
  InteractingReport rep;
  const JumpState a = interacting_jump_solve(t, s.patches, k, 30.0, &rep);
  EXPECT_LT(rep.residual, 1e-10);
  EXPECT_GT(rep.rcond, 1e-14);
  EXPECT_EQ(a.cells.size(), s.num_cells());
  TraceState zero;
  zero.cells.assign(s.num_cells(), Vec5c::Zero());
  for (const Vec5c& c : interacting_jump_solve(zero, s.patches, k, 30.0).cells) EXPECT_EQ(c.norm(), 0.0);
}

TEST(Radiate, ZeroJumpsGiveZeroField) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FractureScene s = small_scene();
  JumpState a;
  a.cells.assign(s.num_cells(), Vec5c::Zero());
  for (const auto& v : radiate(a, s.patches, s.grid.points, k).values) EXPECT_EQ(v.norm(), 0.0);
}

TEST(Radiate, SingleUnitCellIsOneKernelEvaluation) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FracturePatch patch = build_ribbon_patch(Vec3(0.5, 0, 0), 1.0, 0.3, 1.0, 1, 1, soft_contact());
  JumpState a;
  Vec5c d = Vec5c::Zero();
  d.head<3>() = patch.n.cast<cplx>();
  a.cells = {d};
  const Vec3 obs(2, 3, 0.5);
  const RadiatedField f = radiate(a, {patch}, {obs}, k);
  const TraceKernel K = k.trace(obs, patch.center, patch.n);
  for (int j = 0; j < 4; ++j) {
    cplx ref = 0.0;
    for (int r = 0; r < 3; ++r) ref += K(r, j) * patch.n[r];
    EXPECT_LT(std::abs(f.values[0](j) - ref), 1e-15 * std::abs(ref) + 1e-300);
  }
  EXPECT_EQ(f.near_singular, 0u);
  EXPECT_EQ(radiate(a, {patch}, {Vec3(0.5, 0, 0.1)}, k).near_singular, 1u);
}

TEST(Radiate, QuadratureConverges) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const GreensKernel k(ws, p);
  const double wl = 2.0 * kPi / ws.k_s.real();
  const std::vector<Vec3> obs{Vec3(2.0 * wl, 1.0, 0), Vec3(-1.0, 3.0 * wl, 0.2), Vec3(0.5, -4.5 * wl, 0)};
  auto field = [&](int along, int across) {
    const FracturePatch patch = build_ribbon_patch(Vec3::Zero(), 1.0, 0.3, 0.5, along, across, soft_contact());
    JumpState a;
    Vec5c d;
    d << patch.n.cast<cplx>(), cplx(0.2), cplx(0.1, 0.1);
    a.cells.assign(patch.cells.size(), d);
    return radiate(a, {patch}, obs, k);
  };
  const RadiatedField coarse = field(8, 4), fine = field(16, 8);
  for (std::size_t o = 0; o < obs.size(); ++o) {
    EXPECT_LT(rel(coarse.values[o], fine.values[o]), 0.01) << o;
  }
}

TEST(Assemble, EmptySceneIsZero) {
  const MaterialParams p = reference_params();
  FractureScene s = small_scene();
  s.patches.clear();
  const ScatteringMatrix L = assemble_lambda(s, solve_dispersion(p, kReferenceOmega), p);
  EXPECT_EQ(L.values.rows(), 32);
  EXPECT_EQ(L.values.norm(), 0.0);
}

TEST(Assemble, InPlaneDimension) {
  const MaterialParams p = reference_params();
  FractureScene s;
  s.patches.push_back(build_ribbon_patch(Vec3(0, 0, 0), 2.0, 0.3 * kPi, 1.0, 2, 1, soft_contact()));
  s.grid = build_sensing_grid({{Vec3(-7, -7, 0), Vec3(-7, 7, 0)},
                               {Vec3(7, -7, 0), Vec3(7, 7, 0)},
                               {Vec3(-6.5, -3.5, 0), Vec3(6.5, -3.5, 0)}},
                              110, ChannelSet::inplane);
  const ScatteringMatrix L = assemble_lambda(s, solve_dispersion(p, kReferenceOmega), p);
  EXPECT_EQ(L.values.rows(), 990);
  EXPECT_EQ(L.values.cols(), 990);
  EXPECT_EQ(L.channels, (std::vector<int>{0, 1, 3}));
}

TEST(AssembleProperty, LocalModeIsTripleProduct) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const GreensKernel k(ws, p);
  for (ChannelSet set : {ChannelSet::full, ChannelSet::inplane, ChannelSet::fluid}) {
    const FractureScene s = small_scene(set);
    const ScatteringMatrix L = assemble_lambda(s, ws, p);
    const CMatrix S = trace_matrix(s, k);
    const CMatrix R = radiation_matrix(s, k);
    const CMatrix T = local_T_matrix(s, ws.omega);
    EXPECT_LT(rel(L.values, CMatrix(R * T * S)), 1e-12);
    EXPECT_LT(factorization_error(s, ws, p, L.values), 1e-12);
  }
}

TEST(AssembleProperty, ForceChannelReciprocity) {
  const MaterialParams p = reference_params();
  const ScatteringMatrix L = assemble_lambda(small_scene(ChannelSet::full), solve_dispersion(p, kReferenceOmega), p);
  const std::size_t np = L.num_points;
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      for (int r = 0; r < 3; ++r) {
        for (int s = 0; s < 3; ++s) {
          const cplx a = L.values(4 * i + r, 4 * j + s), b = L.values(4 * j + s, 4 * i + r);
          EXPECT_LE(std::abs(a - b), 1e-10 * L.values.norm());
        }
      }
    }
  }
}

TEST(AssembleProperty, InteractingModeReducesToLocalWhenUncoupled) {
  const MaterialParams p = lossy_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  FractureScene s;
  s.patches.push_back(build_ribbon_patch(Vec3(0, 0, 0), 1.0, 0.3, 0.5, 1, 1, soft_contact()));
  s.grid = build_sensing_grid({{Vec3(-2, -2, 0), Vec3(-2, 2, 0)}}, 3);
  ForwardOptions opt;
  opt.mode = SolveMode::interacting;
  const ScatteringMatrix a = assemble_lambda(s, ws, p, opt);
  const ScatteringMatrix b = assemble_lambda(s, ws, p);
  EXPECT_LT(rel(a.values, b.values), 1e-14);
}

TEST(AssembleProperty, AdjointIdentity) {
  for (const MaterialParams& p : {reference_params(), lossy_params()}) {
    const WaveState ws = solve_dispersion(p, kReferenceOmega);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      EXPECT_LT(adjoint_identity_error(small_scene(), ws, p, seed), 1e-8);
    }
  }
}

TEST(AssembleProperty, ThreadCountDoesNotChangeResult) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  ForwardOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const FractureScene s = small_scene();
  EXPECT_EQ(assemble_lambda(s, ws, p, one).values, assemble_lambda(s, ws, p, four).values);
}

TEST(Noise, ZeroEpsilonIsIdentity) {
  const MaterialParams p = reference_params();
  const ScatteringMatrix L = assemble_lambda(small_scene(), solve_dispersion(p, kReferenceOmega), p);
  NoiseSpec spec;
  spec.epsilon = 0.0;
  const ScatteringMatrix N = inject_noise(L, spec, 5);
  EXPECT_EQ(N.values, L.values);
  EXPECT_EQ(N.delta, 0.0);
}

TEST(Noise, TargetDeltaIsAchieved) {
  const MaterialParams p = reference_params();
  ScatteringMatrix L = assemble_lambda(small_scene(), solve_dispersion(p, kReferenceOmega), p);
  // Scale the operator so the target is a moderate perturbation.
  L.values *= 1.0 / spectral_norm(L.values);
  NoiseSpec spec;
  spec.target_delta = 0.05;
  const ScatteringMatrix N = inject_noise(L, spec, 42);
  EXPECT_NEAR(spectral_norm(N.values - L.values), 0.05, 1e-10 * 0.05);
  EXPECT_NEAR(N.delta, spectral_norm(N.values - L.values), 1e-10 * N.delta);
  EXPECT_EQ(N.provenance, "noisy");
  EXPECT_EQ(N.seed, 42u);
}

TEST(Noise, DeterministicUnderSeed) {
  const MaterialParams p = reference_params();
  const ScatteringMatrix L = assemble_lambda(small_scene(), solve_dispersion(p, kReferenceOmega), p);
  NoiseSpec spec;
  spec.epsilon = 0.1;
  EXPECT_EQ(inject_noise(L, spec, 9).values, inject_noise(L, spec, 9).values);
  EXPECT_NE(inject_noise(L, spec, 9).values, inject_noise(L, spec, 10).values);
  const ScatteringMatrix N = inject_noise(L, spec, 9);
  EXPECT_NEAR(N.delta, spectral_norm(N.values - L.values), 1e-10 * N.delta);
}

TEST(Noise, PerturbationEntriesAreBounded) {
  ScatteringMatrix L;
  L.values = CMatrix::Identity(6, 6);
  L.num_points = 6;
  L.channels = {3};
  NoiseSpec spec;
  spec.epsilon = 0.2;
  const ScatteringMatrix N = inject_noise(L, spec, 3);
  const CMatrix E = N.values - L.values;  // = N_eps for identity Lambda
  for (Eigen::Index i = 0; i < E.size(); ++i) {
    EXPECT_LE(std::abs(E(i).real()), 0.2);
    EXPECT_LE(std::abs(E(i).imag()), 0.2);
  }
  EXPECT_EQ(unit_uniform(0), 0.0);
  EXPECT_LT(unit_uniform(~0ull), 1.0);
}

TEST(Admissibility, MapReproducesInterfaceConditions) {
  std::mt19937_64 rng(3);
  const ContactParams c = soft_contact();
  const Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitZ(), n = -Vec3::UnitY();
  const double omega = 1.7;
  const Mat5c P = admissibility_map(c, e1, e2, n, omega);
  const Eigen::Vector3cd nc = n.cast<cplx>();
  const Eigen::Matrix3cd K = c.k_t * (e1 * e1.transpose() + e2 * e2.transpose()).cast<cplx>() +
                             c.normal_stiffness() * (n * n.transpose()).cast<cplx>();
  for (int t = 0; t < 10; ++t) {
    const Vec5c phi = random5(rng);
    const Vec5c out = P * phi;  // (t+t^i, q+q^i, p+p^i)
    const Eigen::Vector3cd r1 = out.head<3>() + c.alpha_tilde() * out(4) * nc - K * phi.head<3>();
    const cplx r2 = out(4) + c.beta_f * (out.head<3>().transpose() * nc)(0) -
                    c.k_n * c.beta_f / (c.Pi * c.alpha_f) * phi(4);
    const cplx r3 = out(3) - c.kappa_f / (kI * omega * c.Pi) * phi(3);
    EXPECT_LT(r1.norm() + std::abs(r2) + std::abs(r3), 1e-12 * (1.0 + out.norm()));
  }
}

TEST(Admissibility, RealStiffnessIsAdmissible) {
  ContactParams c;
  c.k_t = 1.3;
  c.k_n = 0.9;
  c.kappa_f = 0.4;
  c.Pi = 1.0;
  const AdmissibilityReport r = check_admissibility(c, 2.0, 10000, 1);
  EXPECT_TRUE(r.admissible) << r.worst_imag;
  EXPECT_EQ(r.trials, 10000);
}

TEST(Admissibility, NegativePermeabilityIsInadmissible) {
  ContactParams c;
  c.kappa_f = -0.4;
  const AdmissibilityReport r = check_admissibility(c, 2.0, 10000, 1);
  EXPECT_FALSE(r.admissible);
  EXPECT_GT(r.worst_imag, 0.0);
}

TEST(Admissibility, QuadraticFormHomogeneity) {
  const Mat5c P = admissibility_map(soft_contact(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), 1.0);
  std::mt19937_64 rng(8);
  const Vec5c phi = random5(rng);
  const double a = (phi.adjoint() * P * phi)(0).imag();
  const double b = ((3.0 * phi).adjoint() * P * (3.0 * phi))(0).imag();
  EXPECT_NEAR(b, 9.0 * a, 1e-13 * std::abs(b));
}

TEST(MatrixIo, RoundTripIsBitExact) {
  const MaterialParams p = reference_params();
  const ScatteringMatrix L = assemble_lambda(small_scene(ChannelSet::inplane), solve_dispersion(p, kReferenceOmega), p);
  NoiseSpec spec;
  spec.target_delta = 1e-3;
  const ScatteringMatrix N = inject_noise(L, spec, 77);
  std::stringstream ss;
  write_matrix(ss, N);
  const ScatteringMatrix R = read_matrix(ss);
  EXPECT_EQ(R.values, N.values);
  EXPECT_EQ(R.channels, N.channels);
  EXPECT_EQ(R.num_points, N.num_points);
  EXPECT_EQ(R.omega, N.omega);
  EXPECT_EQ(R.delta, N.delta);
  EXPECT_EQ(R.seed, N.seed);
  EXPECT_EQ(R.provenance, N.provenance);
}

TEST(MatrixIo, RejectsMalformed) {
  std::stringstream ss("# poroscat-matrix 1\n# rows=2\n# cols=3\n");
  EXPECT_THROW(read_matrix(ss), Error);
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_TRUE(std::isnan(parse_double("nan")));
}
