#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mktau/common.hpp"
#include "mktau/matrix_series.hpp"
#include "mktau/rng.hpp"

namespace mktau {

/// Full description of a synthetic matrix factor data-generating process:
/// X_t = R F_t C^T + E_t with AR(1) factor and noise dynamics driven by
/// jointly elliptical innovations. Loadings are drawn entrywise uniform on
/// [-1,1]. loading_seed, when set, draws the loadings from that separate seed
/// so several replications can share one loading matrix pair.
struct ScenarioSpec {
  Index T = 0;
  Index p1 = 0;
  Index p2 = 0;
  int k1 = 0;
  int k2 = 0;
  Dist dist = Dist::normal;
  unsigned nu = 0;           // degrees of freedom when dist == student_t
  double phi = 0.0;          // factor AR coefficient, in [0,1)
  double psi = 0.0;          // noise AR coefficient, in [0,1)
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> loading_seed;
};

/// Everything the estimators are later scored against.
struct GroundTruth {
  Eigen::MatrixXd R;                  // p1 x k1
  Eigen::MatrixXd C;                  // p2 x k2
  std::vector<Eigen::MatrixXd> F;     // T factor matrices, k1 x k2
  std::vector<Eigen::MatrixXd> E;     // T noise matrices, p1 x p2
  MatrixSeries S;                     // common components S_t = R F_t C^T
};

/// Equicorrelation matrix: unit diagonal, constant off-diagonal. Raises a
/// parameter error when the result would not be positive definite
/// (offdiag must lie in (-1/(p-1), 1) for p >= 2).
Eigen::MatrixXd corr_matrix(Index p, double offdiag);

/// One matrix-normal draw: U^{1/2} Z V^{1/2} with Z i.i.d. standard normal,
/// so Vec of the result has covariance V kron U. U, V must be symmetric PD.
Eigen::MatrixXd sample_matrix_normal(Index p1, Index p2, const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& V, Rng& rng);

/// One innovation pair (factor eps_t, noise U_t). Under dist=normal the
/// blocks are independent with Vec(eps) ~ N(0, I) and Vec(U) ~ N(0, V_E kron U_E).
/// Under dist=t(nu) the same Gaussian pair is divided by sqrt(chi2_nu / nu)
/// with a single shared mixing scalar, making the blocks jointly elliptical
/// and tail-dependent.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_joint_innovation(
    const ScenarioSpec& spec, const Eigen::MatrixXd& U_E, const Eigen::MatrixXd& V_E,
    Rng& rng);

/// Generates one full scenario: uniform loadings, AR(1) recursions
/// F_t = phi F_{t-1} + sqrt(1-phi^2) eps_t and E_t = psi E_{t-1} + sqrt(1-psi^2) U_t
/// run from a zero state through a 100-step burn-in, then T emitted steps of
/// X_t = R F_t C^T + E_t. Noise scatter is equicorrelation with off-diagonals
/// 1/p1 (rows) and 1/p2 (columns). Fully determined by the spec (seed included).
std::pair<MatrixSeries, GroundTruth> generate_scenario(const ScenarioSpec& spec);

}  // namespace mktau
