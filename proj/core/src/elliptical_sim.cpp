#include "mktau/elliptical_sim.hpp"

#include <cmath>

#include "mktau/spectral.hpp"

namespace mktau {
namespace {

void validate_spec(const ScenarioSpec& spec) {
  if (spec.T < 1 || spec.p1 < 1 || spec.p2 < 1)
    throw ParamError("scenario: dimensions must satisfy T, p1, p2 >= 1");
  if (spec.k1 < 1 || spec.k1 > spec.p1 || spec.k2 < 1 || spec.k2 > spec.p2)
    throw ParamError("scenario: ranks must satisfy 1 <= k1 <= p1 and 1 <= k2 <= p2");
  if (spec.dist == Dist::student_t && spec.nu < 1)
    throw ParamError("scenario: t distribution requires nu >= 1");
  if (!(spec.phi >= 0.0 && spec.phi < 1.0) || !(spec.psi >= 0.0 && spec.psi < 1.0))
    throw ParamError("scenario: AR coefficients must lie in [0, 1)");
}

void fill_normal(Eigen::MatrixXd& M, Rng& rng) {
  for (Index r = 0; r < M.rows(); ++r)
    for (Index c = 0; c < M.cols(); ++c) M(r, c) = rng.normal();
}

// Shared by the public sampler and the scenario loop; takes precomputed
// square roots so the loop does not re-decompose the scatter every step.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> joint_innovation_impl(
    const ScenarioSpec& spec, const Eigen::MatrixXd& U_sqrt, const Eigen::MatrixXd& V_sqrt,
    Rng& rng) {
  Eigen::MatrixXd eps(spec.k1, spec.k2);
  fill_normal(eps, rng);
  Eigen::MatrixXd Z(spec.p1, spec.p2);
  fill_normal(Z, rng);
  Eigen::MatrixXd noise = U_sqrt * Z * V_sqrt;
  if (spec.dist == Dist::student_t) {
    double scale = 1.0 / std::sqrt(rng.chi_squared(spec.nu) / static_cast<double>(spec.nu));
    eps *= scale;
    noise *= scale;
  }
  return {std::move(eps), std::move(noise)};
}

}  // namespace

Eigen::MatrixXd corr_matrix(Index p, double offdiag) {
  if (p < 1) throw ParamError("corr_matrix: dimension must be >= 1");
  // Equicorrelation spectrum: 1 + (p-1)*offdiag once, 1 - offdiag (p-1 times).
  if (p >= 2) {
    if (!(offdiag < 1.0) || !(offdiag > -1.0 / static_cast<double>(p - 1)))
      throw ParamError("corr_matrix: offdiag " + std::to_string(offdiag) +
                       " does not give a positive definite matrix for p = " +
                       std::to_string(p));
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Constant(p, p, offdiag);
  M.diagonal().setOnes();
  return M;
}

Eigen::MatrixXd sample_matrix_normal(Index p1, Index p2, const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& V, Rng& rng) {
  if (p1 < 1 || p2 < 1) throw ParamError("sample_matrix_normal: dimensions must be >= 1");
  if (U.rows() != p1 || U.cols() != p1 || V.rows() != p2 || V.cols() != p2)
    throw ParamError("sample_matrix_normal: scatter shapes must be p1 x p1 and p2 x p2");
  Eigen::MatrixXd U_sqrt = pd_sqrt(U);
  Eigen::MatrixXd V_sqrt = pd_sqrt(V);
  Eigen::MatrixXd Z(p1, p2);
  fill_normal(Z, rng);
  return U_sqrt * Z * V_sqrt;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_joint_innovation(
    const ScenarioSpec& spec, const Eigen::MatrixXd& U_E, const Eigen::MatrixXd& V_E,
    Rng& rng) {
  validate_spec(spec);
  if (U_E.rows() != spec.p1 || U_E.cols() != spec.p1 || V_E.rows() != spec.p2 ||
      V_E.cols() != spec.p2)
    throw ParamError("sample_joint_innovation: scatter shapes must match the spec");
  return joint_innovation_impl(spec, pd_sqrt(U_E), pd_sqrt(V_E), rng);
}

std::pair<MatrixSeries, GroundTruth> generate_scenario(const ScenarioSpec& spec) {
  validate_spec(spec);
  constexpr int kBurnIn = 100;

  Rng loading_rng = Rng::stream(spec.loading_seed.value_or(spec.seed), 0);
  Rng innovation_rng = Rng::stream(spec.seed, 1);

  GroundTruth truth;
  truth.R.resize(spec.p1, spec.k1);
  for (Index r = 0; r < spec.p1; ++r)
    for (Index c = 0; c < spec.k1; ++c) truth.R(r, c) = loading_rng.uniform(-1.0, 1.0);
  truth.C.resize(spec.p2, spec.k2);
  for (Index r = 0; r < spec.p2; ++r)
    for (Index c = 0; c < spec.k2; ++c) truth.C(r, c) = loading_rng.uniform(-1.0, 1.0);

  Eigen::MatrixXd U_E = corr_matrix(spec.p1, 1.0 / static_cast<double>(spec.p1));
  Eigen::MatrixXd V_E = corr_matrix(spec.p2, 1.0 / static_cast<double>(spec.p2));
  Eigen::MatrixXd U_sqrt = pd_sqrt(U_E);
  Eigen::MatrixXd V_sqrt = pd_sqrt(V_E);

  const double f_scale = std::sqrt(1.0 - spec.phi * spec.phi);
  const double e_scale = std::sqrt(1.0 - spec.psi * spec.psi);

  MatrixSeries X(spec.T, spec.p1, spec.p2);
  truth.S = MatrixSeries(spec.T, spec.p1, spec.p2);
  truth.F.reserve(static_cast<std::size_t>(spec.T));
  truth.E.reserve(static_cast<std::size_t>(spec.T));

  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(spec.k1, spec.k2);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(spec.p1, spec.p2);
  for (Index step = -kBurnIn; step < spec.T; ++step) {
    auto [eps, noise] = joint_innovation_impl(spec, U_sqrt, V_sqrt, innovation_rng);
    F = spec.phi * F + f_scale * eps;
    E = spec.psi * E + e_scale * noise;
    if (step < 0) continue;
    Eigen::MatrixXd S_t = truth.R * F * truth.C.transpose();
    truth.S.slice(step) = S_t;
    X.slice(step) = S_t + E;
    truth.F.push_back(F);
    // Stored as the emitted residual X_t - S_t (sub-ulp from the AR state E)
    // so the decomposition identity holds bit-exactly for consumers.
    truth.E.push_back(X.slice(step) - S_t);
  }
  return {std::move(X), std::move(truth)};
}

}  // namespace mktau
