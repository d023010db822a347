#pragma once

#include <string>
#include <vector>

#include "poroscat/forward.hpp"
#include "poroscat/greens.hpp"
#include "poroscat/scene.hpp"
#include "poroscat/types.hpp"

namespace poroscat {

struct TrialPattern {
  Vec3 x;
  Vec3 n;
  int iota = 1;
  CVector phi;
};

/// Pattern on the sensing grid of a point density b at x: b = (n, 0, 0) for
/// iota = 1 (opening dislocation), b = (0, 0, 0, 0, 1) for iota = 0 (flow-jump
/// monopole). Rows follow the grid's (point, channel) order.
TrialPattern trial_pattern(const Vec3& x, const Vec3& n, int iota, const SensingGrid& grid,
                           const GreensKernel& kernel);

/// Hermitian PSD operator |Re L| + |Im L| with Re L = (L + L*)/2 and
/// Im L = (L - L*)/(2i), together with its eigendecomposition.
struct LambdaSharp {
  CMatrix matrix;
  CMatrix vectors;
  RVector values;  // clamped at 1e-14 * max
};

LambdaSharp lambda_sharp_decomposition(const CMatrix& L);
CMatrix lambda_sharp(const CMatrix& L);

/// Thin SVD of the data operator, reused across right-hand sides.
struct SpectralCache {
  CMatrix U;
  CMatrix V;
  RVector s;
  RVector s2;
  double norm = 0.0;

  explicit SpectralCache(const CMatrix& L);
};

/// argmin |L g - phi|^2 + eta |g|^2.
CVector tikhonov_solve(const CMatrix& L, const CVector& phi, double eta);
CVector tikhonov_solve(const SpectralCache& svd, const CVector& phi, double eta);

struct MorozovResult {
  double eta = 0.0;
  bool bracketed = false;
  double residual = 0.0;
  double solution_norm = 0.0;
  int iterations = 0;
};

struct EtaBracket {
  double lo = 1e-14;
  double hi = 1e2;
};

/// Root of |L g_eta - phi| = delta |g_eta| by bisection in log(eta).
/// Without a sign change the nearer endpoint is returned, bracketed = false.
MorozovResult morozov_eta(const CMatrix& L, const CVector& phi, double delta, const EtaBracket& bracket);
MorozovResult morozov_eta(const SpectralCache& svd, const CVector& phi, double delta, const EtaBracket& bracket);
/// Same, starting from c = U* phi and |phi_perp|^2.
MorozovResult morozov_from_coefficients(const SpectralCache& svd, const RVector& c_abs2, double tail_sq,
                                        double delta, const EtaBracket& bracket);

/// Solves (L*L + alpha (S + delta I)) g = L* phi with a Hermitian PD factorization.
CVector glsm_solve(const CMatrix& L, const CMatrix& sharp, const CVector& phi, double alpha, double delta);

/// alpha = eta / (|L|_2 + delta).
double glsm_alpha(double eta, double norm_L, double delta);

/// 1 / sqrt(g* S g + delta |g|^2).
double glsm_indicator_value(const CMatrix& sharp, const CVector& g, double delta);

enum class Method { lsm, glsm };
Method parse_method(const std::string& name);
std::string to_string(Method m);

enum class AlphaPolicy { per_point, fixed };
AlphaPolicy parse_alpha_policy(const std::string& name);
std::string to_string(AlphaPolicy p);

struct IndicatorResult {
  double value = 0.0;
  int candidate = -1;
  double g_norm = 0.0;
};

/// Minimal-|g| candidate of the Tikhonov/Morozov solutions; value = 1/|g|.
IndicatorResult lsm_indicator_at(const std::vector<CVector>& candidates, const SpectralCache& svd, double delta,
                                 const EtaBracket& bracket);

/// Minimal-|g| candidate of the GLSM solutions (alpha from each candidate's
/// Morozov eta); value = 1/sqrt(g* S g + delta |g|^2).
IndicatorResult glsm_indicator_at(const std::vector<CVector>& candidates, const CMatrix& L,
                                  const SpectralCache& svd, const CMatrix& sharp, double delta,
                                  const EtaBracket& bracket);

struct InversionOptions {
  Method method = Method::lsm;
  AlphaPolicy alpha_policy = AlphaPolicy::per_point;
  /// Lower bound on the regularization noise level, relative to |L|_2.
  double delta_floor = 1e-3;
  /// Morozov bracket relative to |L|_2^2.
  EtaBracket eta_bracket_relative{1e-16, 1e2};
  int threads = 0;
};

struct IndicatorMap {
  SamplingGrid grid;
  Method method = Method::lsm;
  double omega = 0.0;
  double delta = 0.0;  // noise level used for regularization
  double raw_max = 0.0;
  bool degenerate = false;
  std::vector<double> raw;         // NaN where the point failed
  std::vector<double> normalized;  // raw / raw_max
  std::vector<int> normal_index;
  std::vector<int> iota;
  std::vector<std::string> warnings;
};

/// GLSM with many right-hand sides: one generalized Hermitian eigensolve of
/// (L*L, S + delta I) serves every (phi, alpha).
class GlsmBatch {
 public:
  GlsmBatch(const CMatrix& L, const CMatrix& sharp, double delta);
  /// Same g as glsm_solve(L, sharp, phi, alpha, delta).
  CVector solve(const CVector& phi, double alpha) const;
  /// Returns |g| and the indicator 1/sqrt(g* (S + delta I) g).
  void evaluate(const CVector& phi, double alpha, double& g_norm, double& value) const;

 private:
  CMatrix V_;
  RVector d_;
  CMatrix P_;  // V* L*
};

/// Regularization noise level: max(data delta, floor * |L|_2).
double effective_delta(double data_delta, double norm_L, double floor_relative);

IndicatorMap indicator_map(const SensingGrid& grid, const ScatteringMatrix& data, const GreensKernel& kernel,
                           const SamplingGrid& sampling, const InversionOptions& options);

}  // namespace poroscat
