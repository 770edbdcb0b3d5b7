#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "mktau/common.hpp"
#include "mktau/matrix_series.hpp"

namespace mktau {

/// Distance between the column spaces of Q1 (p x q1) and Q2 (p x q2):
/// sqrt(1 - tr(Q1 Q1^T Q2 Q2^T) / max(q1, q2)), after orthonormalizing either
/// input by (unpivoted) QR when its Gram matrix deviates from the identity by
/// more than 1e-8. 0 for identical spans, 1 for orthogonal ones. Inputs must
/// have full column rank.
double subspace_distance(const Eigen::MatrixXd& Q1, const Eigen::MatrixXd& Q2);

/// Mean squared error between two series: (1/(T p1 p2)) sum_t ||est_t - truth_t||_F^2.
double mse_common(const MatrixSeries& est, const MatrixSeries& truth);

struct PricingErrors {
  double mse = 0.0;   // (1/(T p1 p2)) sum_t ||fitted_t - actual_t||_F^2
  double rho = 0.0;   // sum ||fitted_t - actual_t||_F^2 / sum ||actual_t - mean||_F^2
};

/// Per-window pricing error and unexplained proportion of total variance,
/// with the denominator centered at the within-window mean matrix. An
/// all-constant actual window has no variance to explain and is an error.
PricingErrors pricing_errors(const MatrixSeries& actual, const MatrixSeries& fitted);

/// Drift of the joint loading space between consecutive windows:
/// subspace_distance(C_curr kron R_curr, C_prev kron R_prev).
double loading_variation(const Eigen::MatrixXd& R_prev, const Eigen::MatrixXd& C_prev,
                         const Eigen::MatrixXd& R_curr, const Eigen::MatrixXd& C_curr);

/// One rolling-validation window result. v is absent for the first window
/// (there is no previous loading space to compare against).
struct RollingWindowRow {
  int window = 0;
  double mse = 0.0;
  double rho = 0.0;
  std::optional<double> v;
};

/// Rolling-validation report: per-window rows plus their arithmetic means
/// and the configuration that produced them.
struct RollingReport {
  int window_len = 0;
  int block_len = 0;
  int k1 = 0;
  int k2 = 0;
  Method method = Method::mrts;
  std::vector<RollingWindowRow> rows;
  double mean_mse = 0.0;
  double mean_rho = 0.0;
  std::optional<double> mean_v;   // over windows 2..n; absent with a single window
};

}  // namespace mktau
