#include <gtest/gtest.h>

#include <random>

#include "poroscat/diagnostics.hpp"
#include "poroscat/errors.hpp"
#include "poroscat/inversion.hpp"

using namespace poroscat;

namespace {

CMatrix random_matrix(std::mt19937_64& rng, int n, int m = -1) {
  std::normal_distribution<double> g;
  CMatrix A(n, m < 0 ? n : m);
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = cplx(g(rng), g(rng));
  return A;
}

CVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

CVector e1(int n) {
  CVector v = CVector::Zero(n);
  v(0) = 1.0;
  return v;
}

double tikhonov_cost(const CMatrix& L, const CVector& phi, const CVector& g, double eta) {
  return (L * g - phi).squaredNorm() + eta * g.squaredNorm();
}

ContactParams soft_contact() {
  ContactParams c;
  c.k_t = {0.5, 0.02};
  c.k_n = {0.8, 0.01};
  c.kappa_f = 0.3;
  return c;
}

FractureScene small_scene(ChannelSet set = ChannelSet::full) {
  FractureScene s;
  s.patches.push_back(build_ribbon_patch(Vec3(0.2, 0.1, 0), 1.2, 0.3 * kPi, 0.6, 4, 2, soft_contact()));
  s.grid = build_sensing_grid({{Vec3(-3, -3, 0), Vec3(-3, 3, 0), Vec3(3, 3, 0)}}, 5, set);
  return s;
}

}  // namespace

TEST(LambdaSharp, ScalarImaginary) {
  CMatrix L(1, 1);
  L(0, 0) = cplx(0.0, 1.0);
  EXPECT_NEAR(std::abs(lambda_sharp(L)(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(LambdaSharp, Diagonal) {
  CMatrix L = CMatrix::Identity(3, 3) * cplx(1.0, 1.0);
  EXPECT_LT((lambda_sharp(L) - 2.0 * CMatrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(LambdaSharpProperty, HermitianPositiveSemidefinite) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(2, 32);
  for (int t = 0; t < 100; ++t) {
    const CMatrix L = random_matrix(rng, size(rng));
    const CMatrix S = lambda_sharp(L);
    const double ns = S.norm();
    EXPECT_LT((S - S.adjoint()).norm(), 1e-12 * ns);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * ns);
  }
}

TEST(LambdaSharp, NonSquareRaises) {
  EXPECT_THROW(lambda_sharp(CMatrix::Zero(2, 3)), DomainError);
}

TEST(Tikhonov, IdentityClosedForm) {
  const CVector g = tikhonov_solve(CMatrix::Identity(2, 2), e1(2), 1.0);
  EXPECT_NEAR(std::abs(g(0) - 0.5), 0.0, 1e-15);
  EXPECT_EQ(g(1), cplx(0.0));
}

TEST(Tikhonov, VanishingParameterInverts) {
  std::mt19937_64 rng(2);
  const CMatrix L = random_matrix(rng, 5) + 5.0 * CMatrix::Identity(5, 5);
  const CVector phi = random_vector(rng, 5);
  const CVector exact = L.partialPivLu().solve(phi);
  EXPECT_LT((tikhonov_solve(L, phi, 1e-14) - exact).norm(), 1e-10 * exact.norm());
}

TEST(TikhonovProperty, NormalEquationsAndMinimality) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const CMatrix L = random_matrix(rng, 6);
    const CVector phi = random_vector(rng, 6);
    const double eta = std::pow(10.0, -3.0 + 0.2 * t);
    const CVector g = tikhonov_solve(L, phi, eta);
    const CVector rhs = L.adjoint() * phi;
    const CVector res = L.adjoint() * (L * g) + eta * g - rhs;
    EXPECT_LT(res.norm(), 1e-10 * rhs.norm());
    const double j0 = tikhonov_cost(L, phi, g, eta);
    for (int k = 0; k < 5; ++k) {
      const CVector v = random_vector(rng, 6).normalized();
      EXPECT_GT(tikhonov_cost(L, phi, g + 1e-3 * v, eta), j0);
    }
  }
}

TEST(Tikhonov, NonPositiveParameterRaises) {
  EXPECT_THROW(tikhonov_solve(CMatrix::Identity(2, 2), e1(2), 0.0), DomainError);
}

TEST(Morozov, IdentityGivesDelta) {
  for (double delta : {0.05, 0.3, 1e-4}) {
    const MorozovResult r = morozov_eta(CMatrix::Identity(2, 2), e1(2), delta, EtaBracket{1e-12, 1e2});
    EXPECT_TRUE(r.bracketed);
    EXPECT_NEAR(r.eta, delta, 1e-14 * std::max(1.0, delta));
  }
}

TEST(Morozov, ZeroRightHandSideRaises) {
  EXPECT_THROW(morozov_eta(CMatrix::Identity(2, 2), CVector::Zero(2), 0.1, EtaBracket{}), DomainError);
  EXPECT_THROW(morozov_eta(CMatrix::Identity(2, 2), CVector(), 0.1, EtaBracket{}), DomainError);
}

TEST(MorozovProperty, MonotoneInDeltaAndDiscrepancyHolds) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const CMatrix L = random_matrix(rng, 8);
    const CVector phi = random_vector(rng, 8);
    const SpectralCache svd(L);
    const EtaBracket br{1e-16 * svd.norm * svd.norm, 1e2 * svd.norm * svd.norm};
    double prev = 0.0;
    for (double delta : {1e-3, 1e-2, 1e-1}) {
      const MorozovResult r = morozov_eta(svd, phi, delta, br);
      ASSERT_TRUE(r.bracketed);
      EXPECT_GT(r.eta, prev);
      prev = r.eta;
      const CVector g = tikhonov_solve(svd, phi, r.eta);
      const double lhs = (L * g - phi).norm(), rhs = delta * g.norm();
      EXPECT_LE(std::abs(lhs - rhs), 1e-6 * rhs);
    }
  }
}

TEST(Morozov, UnbracketedReturnsNearestEndpoint) {
  const MorozovResult r = morozov_eta(CMatrix::Identity(2, 2), e1(2), 0.05, EtaBracket{1.0, 10.0});
  EXPECT_FALSE(r.bracketed);
  EXPECT_EQ(r.eta, 1.0);
}

TEST(Glsm, UnitClosedForm) {
  const CMatrix I = CMatrix::Identity(3, 3);
  const CVector g = glsm_solve(I, I, e1(3), 1.0, 0.0);
  EXPECT_NEAR(std::abs(g(0) - 0.5), 0.0, 1e-14);
  EXPECT_EQ(g.tail(2).norm(), 0.0);
  EXPECT_NEAR(glsm_indicator_value(I, g, 0.0), 2.0, 1e-14);
}

TEST(GlsmProperty, LinearSystemResidual) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const CMatrix L = random_matrix(rng, 8);
    const CMatrix S = lambda_sharp(L);
    const CVector phi = random_vector(rng, 8);
    const double alpha = 0.01 * (t + 1), delta = 0.05;
    const CVector g = glsm_solve(L, S, phi, alpha, delta);
    const CVector rhs = L.adjoint() * phi;
    const CVector res = L.adjoint() * (L * g) + alpha * (S * g + delta * g) - rhs;
    EXPECT_LT(res.norm(), 1e-10 * rhs.norm());
  }
}

TEST(Glsm, PenaltyDominance) {
  std::mt19937_64 rng(6);
  const CMatrix L = random_matrix(rng, 6);
  const CMatrix S = lambda_sharp(L);
  const CVector phi = random_vector(rng, 6);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {1.0, 1e2, 1e4, 1e6}) {
    const double n = glsm_solve(L, S, phi, alpha, 0.1).norm();
    EXPECT_LT(n, prev);
    prev = n;
  }
  EXPECT_LT(prev, 1e-4 * phi.norm());
}

TEST(Glsm, SingularSystemRaises) {
  CMatrix L = CMatrix::Zero(3, 3);
  L(0, 0) = 1.0;
  EXPECT_THROW(glsm_solve(L, lambda_sharp(L), e1(3), 0.0, 0.0), ConditioningError);
}

TEST(Glsm, AlphaRule) {
  EXPECT_DOUBLE_EQ(glsm_alpha(0.6, 2.0, 1.0), 0.2);
}

TEST(GlsmBatch, MatchesDirectSolve) {
  std::mt19937_64 rng(7);
  const CMatrix L = random_matrix(rng, 10);
  const CMatrix S = lambda_sharp(L);
  const double delta = 0.03;
  const GlsmBatch batch(L, S, delta);
  for (int t = 0; t < 5; ++t) {
    const CVector phi = random_vector(rng, 10);
    const double alpha = 0.05 * (t + 1);
    const CVector g = glsm_solve(L, S, phi, alpha, delta);
    EXPECT_LT((batch.solve(phi, alpha) - g).norm(), 1e-10 * g.norm());
    double gn = 0.0, value = 0.0;
    batch.evaluate(phi, alpha, gn, value);
    EXPECT_NEAR(gn, g.norm(), 1e-10 * g.norm());
    EXPECT_NEAR(value, glsm_indicator_value(S, g, delta), 1e-9 * value);
  }
}

TEST(GlsmIndicator, UnitInstance) {
  const CMatrix I = CMatrix::Identity(2, 2);
  const SpectralCache svd(I);
  // A bracket pinned at eta = 1 gives alpha = eta / (|L| + delta) = 1.
  const IndicatorResult r = glsm_indicator_at({e1(2)}, I, svd, I, 1e-300, EtaBracket{1.0, 1.0 + 1e-15});
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  EXPECT_NEAR(r.g_norm, 0.5, 1e-12);
}

TEST(GlsmIndicator, CoincidesWithLsmFormWhenSharpIsIdentity) {
  std::mt19937_64 rng(8);
  const CMatrix L = random_matrix(rng, 5);
  const CVector g = random_vector(rng, 5);
  EXPECT_NEAR(glsm_indicator_value(CMatrix::Identity(5, 5), g, 0.0), 1.0 / g.norm(), 1e-14);
}

TEST(GlsmIndicator, UnitaryInvariance) {
  std::mt19937_64 rng(9);
  const CMatrix L = random_matrix(rng, 6);
  const CMatrix Q = random_matrix(rng, 6).householderQr().householderQ();
  std::vector<CVector> cands{random_vector(rng, 6), random_vector(rng, 6)};
  const double delta = 0.05;
  const EtaBracket br{1e-12, 1e4};
  const IndicatorResult a = glsm_indicator_at(cands, L, SpectralCache(L), lambda_sharp(L), delta, br);
  // Change of data basis: L -> Q L Q*, phi -> Q phi.
  const CMatrix Lq = Q * L * Q.adjoint();
  std::vector<CVector> cq;
  for (const CVector& c : cands) cq.push_back(Q * c);
  const IndicatorResult b = glsm_indicator_at(cq, Lq, SpectralCache(Lq), Q * lambda_sharp(L) * Q.adjoint(), delta, br);
  EXPECT_NEAR(a.value, b.value, 1e-8 * a.value);
  EXPECT_EQ(a.candidate, b.candidate);
}

TEST(LsmIndicator, SingleAndDuplicatedCandidates) {
  std::mt19937_64 rng(10);
  const CMatrix L = random_matrix(rng, 6);
  const SpectralCache svd(L);
  const EtaBracket br{1e-12, 1e4};
  const CVector phi = random_vector(rng, 6), psi = random_vector(rng, 6);
  const IndicatorResult single = lsm_indicator_at({phi}, svd, 0.05, br);
  const MorozovResult mr = morozov_eta(svd, phi, 0.05, br);
  EXPECT_NEAR(single.value, 1.0 / tikhonov_solve(svd, phi, mr.eta).norm(), 1e-12 * single.value);
  const IndicatorResult two = lsm_indicator_at({phi, psi}, svd, 0.05, br);
  const IndicatorResult dup = lsm_indicator_at({phi, psi, phi, psi}, svd, 0.05, br);
  EXPECT_EQ(two.value, dup.value);
  EXPECT_EQ(two.candidate, dup.candidate);
}

TEST(LsmIndicatorProperty, ScalingTheRightHandSide) {
  std::mt19937_64 rng(11);
  const CMatrix L = random_matrix(rng, 6);
  const SpectralCache svd(L);
  const EtaBracket br{1e-12, 1e4};
  std::vector<CVector> cands{random_vector(rng, 6), random_vector(rng, 6), random_vector(rng, 6)};
  const IndicatorResult a = lsm_indicator_at(cands, svd, 0.05, br);
  for (CVector& c : cands) c *= 3.0;
  const IndicatorResult b = lsm_indicator_at(cands, svd, 0.05, br);
  EXPECT_NEAR(b.value, a.value / 3.0, 1e-8 * a.value);
  EXPECT_EQ(a.candidate, b.candidate);
}

TEST(TrialPattern, MonopolePressureRowsAreFluidGreenFunction) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const SensingGrid grid = build_sensing_grid({{Vec3(-2, -2, 0), Vec3(-2, 2, 0)}}, 4, ChannelSet::full);
  const Vec3 x(0.3, 0.2, 0.0);
  const TrialPattern tp = trial_pattern(x, Vec3::UnitX(), 0, grid, k);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    EXPECT_EQ(tp.phi(grid.index(j, 3)), k.tensor(grid.points[j], x)(3, 3));
  }
}

TEST(TrialPattern, PatternIsEvenInTheNormal) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const SensingGrid grid = build_sensing_grid({{Vec3(-2, -2, 0), Vec3(-2, 2, 0)}}, 4, ChannelSet::inplane);
  const Vec3 x(0.3, 0.2, 0.0), n = Vec3(0.6, 0.8, 0.0);
  // The trial crack's traction kernel and its dipole density both flip with n,
  // so antipodal normals are the same trial.
  const CVector a = trial_pattern(x, n, 1, grid, k).phi, b = trial_pattern(x, -n, 1, grid, k).phi;
  EXPECT_LT((a - b).norm(), 1e-15 * a.norm());
  // Linearity in the density: the kernel contracted with -b negates the pattern.
  CVector c = CVector::Zero(a.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const TraceKernel K = k.trace(grid.points[j], x, n);
    for (int s = 0; s < grid.num_channels(); ++s) {
      for (int r = 0; r < 3; ++r) c(grid.index(j, s)) -= n[r] * K(r, grid.channels[s]);
    }
  }
  EXPECT_LT((a + c).norm(), 1e-15 * a.norm());
  // The monopole does not depend on the normal.
  EXPECT_EQ(trial_pattern(x, n, 0, grid, k).phi, trial_pattern(x, -n, 0, grid, k).phi);
}

TEST(TrialPattern, OnFractureCellMatchesRadiationColumn) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const FractureScene s = small_scene(ChannelSet::inplane);
  const CMatrix R = radiation_matrix(s, k);
  const std::vector<CellRef> cells = flatten_cells(s.patches);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CVector dip = trial_pattern(cells[c].center, cells[c].n, 1, s.grid, k).phi;
    CVector ref = CVector::Zero(dip.size());
    for (int r = 0; r < 3; ++r) ref += cells[c].n[r] * R.col(5 * c + r) / cells[c].area;
    EXPECT_LT((dip - ref).norm(), 1e-14 * ref.norm());
    const CVector mono = trial_pattern(cells[c].center, cells[c].n, 0, s.grid, k).phi;
    EXPECT_LT((mono - R.col(5 * c + 4) / cells[c].area).norm(), 1e-14 * mono.norm());
  }
}

TEST(TrialPattern, CoincidentPointRaises) {
  const MaterialParams p = reference_params();
  const GreensKernel k(solve_dispersion(p, kReferenceOmega), p);
  const SensingGrid grid = build_sensing_grid({{Vec3(-2, -2, 0), Vec3(-2, 2, 0)}}, 3);
  EXPECT_THROW(trial_pattern(Vec3(-2, 0, 0), Vec3::UnitX(), 1, grid, k), SingularityError);
}

TEST(IndicatorMap, EmptySceneIsDegenerate) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  FractureScene s = small_scene();
  s.patches.clear();
  const ScatteringMatrix L = assemble_lambda(s, ws, p);
  const IndicatorMap m = indicator_map(s.grid, L, GreensKernel(ws, p), build_sampling_grid(-1, 1, -1, 1, 3, 3, 2, {1, 0}), {});
  EXPECT_TRUE(m.degenerate);
  for (double v : m.raw) EXPECT_EQ(v, 0.0);
}

TEST(IndicatorMapProperty, PointsAreIndependent) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const GreensKernel k(ws, p);
  const FractureScene s = small_scene();
  const ScatteringMatrix L = assemble_lambda(s, ws, p);
  const SamplingGrid sg = build_sampling_grid(-1.5, 1.5, -1.5, 1.5, 3, 3, 4, {1, 0});
  for (Method method : {Method::lsm, Method::glsm}) {
    InversionOptions opt;
    opt.method = method;
    const IndicatorMap full = indicator_map(s.grid, L, k, sg, opt);
    // Visit points in reverse order, one single-point grid at a time.
    for (std::size_t q = sg.num_points(); q-- > 0;) {
      const Vec3 x = sg.point(q);
      SamplingGrid one = build_sampling_grid(x.x() - 0.5, x.x() + 0.5, x.y() - 0.5, x.y() + 0.5, 1, 1, 4, {1, 0});
      const IndicatorMap m = indicator_map(s.grid, L, k, one, opt);
      EXPECT_EQ(m.raw[0], full.raw[q]);
      EXPECT_EQ(m.normal_index[0], full.normal_index[q]);
      EXPECT_EQ(m.iota[0], full.iota[q]);
    }
  }
}

TEST(IndicatorMapProperty, ThreadCountDoesNotChangeResult) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const GreensKernel k(ws, p);
  const FractureScene s = small_scene();
  const ScatteringMatrix L = assemble_lambda(s, ws, p);
  const SamplingGrid sg = build_sampling_grid(-1.5, 1.5, -1.5, 1.5, 4, 3, 4, {1, 0});
  InversionOptions a, b;
  a.threads = 1;
  b.threads = 3;
  EXPECT_EQ(indicator_map(s.grid, L, k, sg, a).raw, indicator_map(s.grid, L, k, sg, b).raw);
}

TEST(IndicatorMap, GlsmWarnsForComplexGamma) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const FractureScene s = small_scene();
  InversionOptions opt;
  opt.method = Method::glsm;
  const IndicatorMap m = indicator_map(s.grid, assemble_lambda(s, ws, p), GreensKernel(ws, p),
                                       build_sampling_grid(-1, 1, -1, 1, 2, 2, 2, {1}), opt);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("complex gamma"), std::string::npos);
  for (double v : m.normalized) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(IndicatorMap, FixedAlphaPolicyRuns) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const FractureScene s = small_scene();
  InversionOptions opt;
  opt.method = Method::glsm;
  opt.alpha_policy = AlphaPolicy::fixed;
  const IndicatorMap m = indicator_map(s.grid, assemble_lambda(s, ws, p), GreensKernel(ws, p),
                                       build_sampling_grid(-1, 1, -1, 1, 3, 3, 2, {1, 0}), opt);
  for (double v : m.raw) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(m.raw_max, *std::max_element(m.raw.begin(), m.raw.end()));
}

TEST(IndicatorMap, MismatchedDataRaises) {
  const MaterialParams p = reference_params();
  const WaveState ws = solve_dispersion(p, kReferenceOmega);
  const FractureScene s = small_scene(ChannelSet::full);
  const FractureScene t = small_scene(ChannelSet::inplane);
  EXPECT_THROW(indicator_map(t.grid, assemble_lambda(s, ws, p), GreensKernel(ws, p),
                             build_sampling_grid(-1, 1, -1, 1, 1, 1, 1, {1}), {}),
               CompatibilityError);
}

TEST(ConjugateForm, SymmetrizesAsGammaBecomesReal) {
  MaterialParams p = reference_params();
  const FractureScene s = small_scene();
  const double table = conjugate_form_error(s, solve_dispersion(p, kReferenceOmega), p);
  p.kappa = 1e2;
  const double mild = conjugate_form_error(s, solve_dispersion(p, kReferenceOmega), p);
  p.kappa = 1e12;
  const double lossless = conjugate_form_error(s, solve_dispersion(p, kReferenceOmega), p);
  EXPECT_LT(lossless, 1e-8);
  EXPECT_GT(mild, 1e3 * lossless);
  EXPECT_GE(table, mild);
}
