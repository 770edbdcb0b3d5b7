#include "mktau/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mktau/errors.hpp"

namespace mktau {
namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& Q) {
  const Eigen::Index p = Q.rows(), q = Q.cols();
  if (!Q.allFinite()) throw ValidationError("subspace_distance: non-finite input");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(Q);
  if (rank_check.rank() < q)
    throw ValidationError("subspace_distance: input is rank-deficient (rank " +
                          std::to_string(rank_check.rank()) + " < " + std::to_string(q) + ")");
  Eigen::MatrixXd gram = Q.transpose() * Q;
  gram.diagonal().array() -= 1.0;
  if (gram.cwiseAbs().maxCoeff() <= 1e-8) return Q;
  // Unpivoted QR keeps the column-space without reordering.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
  return qr.householderQ() * Eigen::MatrixXd::Identity(p, q);
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

}  // namespace

double subspace_distance(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& Q2) {
  const Eigen::Index q1 = Q1.cols(), q2 = Q2.cols();
  if (q1 < 1 || q2 < 1)
    throw ParamError("subspace_distance: inputs need at least one column");
  if (Q1.rows() != Q2.rows())
    throw ParamError("subspace_distance: inputs must share the ambient dimension");
  if (Q1.rows() < std::max(q1, q2))
    throw ParamError("subspace_distance: ambient dimension must be >= max(q1, q2)");

  Eigen::MatrixXd B1 = orthonormalize(Q1);
  Eigen::MatrixXd B2 = orthonormalize(Q2);
  // tr(B1 B1^T B2 B2^T) = ||B1^T B2||_F^2.
  double tr = (B1.transpose() * B2).squaredNorm();
  double radicand = 1.0 - tr / static_cast<double>(std::max(q1, q2));
  radicand = std::clamp(radicand, 0.0, 1.0);
  return std::sqrt(radicand);
}

double mse_common(const MatrixSeries& est, const MatrixSeries& truth) {
  if (est.T != truth.T || est.p1 != truth.p1 || est.p2 != truth.p2)
    throw ParamError("mse_common: series dimensions differ");
  double acc = 0.0;
  for (Index t = 0; t < est.T; ++t) acc += (est.slice(t) - truth.slice(t)).squaredNorm();
  return acc / static_cast<double>(est.T * est.p1 * est.p2);
}

PricingErrors pricing_errors(const MatrixSeries& actual, const MatrixSeries& fitted) {
  if (actual.T != fitted.T || actual.p1 != fitted.p1 || actual.p2 != fitted.p2)
    throw ParamError("pricing_errors: series dimensions differ");

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(actual.p1, actual.p2);
  for (Index t = 0; t < actual.T; ++t) mean += actual.slice(t);
  mean /= static_cast<double>(actual.T);

  double num = 0.0, den = 0.0;
  for (Index t = 0; t < actual.T; ++t) {
    num += (fitted.slice(t) - actual.slice(t)).squaredNorm();
    den += (actual.slice(t) - mean).squaredNorm();
  }
  if (den == 0.0)
    throw DegenerateError("pricing_errors: actual window is constant (zero total variance)");

  PricingErrors out;
  out.mse = num / static_cast<double>(actual.T * actual.p1 * actual.p2);
  out.rho = num / den;
  return out;
}

double loading_variation(const Eigen::MatrixXd& R_prev, const Eigen::MatrixXd& C_prev,
                         const Eigen::MatrixXd& R_curr, const Eigen::MatrixXd& C_curr) {
  if (R_prev.rows() != R_curr.rows() || R_prev.cols() != R_curr.cols() ||
      C_prev.rows() != C_curr.rows() || C_prev.cols() != C_curr.cols())
    throw ParamError("loading_variation: loading shapes differ across windows");
  return subspace_distance(kron(C_curr, R_curr), kron(C_prev, R_prev));
}

}  // namespace mktau
