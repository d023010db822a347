#pragma once

#include <cstdint>

#include "poroscat/forward.hpp"
#include "poroscat/greens.hpp"
#include "poroscat/inversion.hpp"
#include "poroscat/scene.hpp"

namespace poroscat {

/// Relative residual of each source column of the fundamental solution in the
/// homogeneous Biot system at xi != y, from 5-point central differences.
/// Each entry is |residual| / (largest term magnitude).
Eigen::Vector4d biot_residual(const GreensKernel& kernel, const Vec3& y, const Vec3& xi, double h = 1e-3);

/// |<S g, a>_Gamma - (g, R(conj gamma) a)_G| / |<S g, a>_Gamma| for seeded random g, a.
double adjoint_identity_error(const FractureScene& scene, const WaveState& wave, const MaterialParams& params,
                              std::uint64_t seed);

/// |Lambda - (column-by-column incident -> local jump -> radiate)| / |Lambda|.
double factorization_error(const FractureScene& scene, const WaveState& wave, const MaterialParams& params,
                           const CMatrix& lambda);

/// |Lambda - R(conj-continued gamma) T S| / |Lambda| in local mode: how far the
/// data operator is from the form with the conjugated coupling coefficient.
/// Vanishes as Im(gamma) -> 0.
double conjugate_form_error(const FractureScene& scene, const WaveState& wave, const MaterialParams& params);

/// Imaging quality of a map against the true fracture traces. A sampling cell
/// is on-fracture when its centre lies within half a cell diagonal of a patch.
struct LocalizationStats {
  double peak_distance = 0.0;  // distance of the map maximum to the nearest patch
  double peak_cells = 0.0;     // same, in sampling cells (largest cell side)
  double on_mean = 0.0;        // mean normalized indicator over on-fracture cells
  double far_mean = 0.0;       // mean over cells farther than far_distance
  double contrast = 0.0;       // on_mean / far_mean
  std::size_t on_count = 0;
  std::size_t far_count = 0;
};
LocalizationStats localization_stats(const IndicatorMap& map, const FractureScene& scene, double far_distance);

}  // namespace poroscat
