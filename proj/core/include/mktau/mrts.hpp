#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "mktau/common.hpp"
#include "mktau/matrix_series.hpp"
#include "mktau/spectral.hpp"

namespace mktau {

/// Estimated loading pair with the full spectra that produced it.
/// Normalization: (1/p1) R_hat^T R_hat = I and (1/p2) C_hat^T C_hat = I,
/// both to 1e-8. The degenerate-gap flags warn that the k-th spectral gap of
/// the underlying matrix is below 1e-10, i.e. the subspace is ill-identified.
struct LoadingEstimate {
  Eigen::MatrixXd R_hat;              // p1 x k1
  Eigen::MatrixXd C_hat;              // p2 x k2
  Eigen::VectorXd row_eigenvalues;    // full spectrum, non-increasing
  Eigen::VectorXd col_eigenvalues;
  Method method = Method::mrts;
  bool degenerate_gap_row = false;
  bool degenerate_gap_col = false;
};

/// Loadings plus least-squares factor scores, optionally with the fitted
/// common components S_hat_t = R_hat F_hat_t C_hat^T.
struct FactorFit {
  LoadingEstimate loadings;
  std::vector<Eigen::MatrixXd> factors;   // T matrices, k1 x k2
  std::optional<MatrixSeries> common;
};

/// Two-step robust loadings: sqrt(p) times the leading eigenvectors of the
/// row/column Kendall matrices of the series.
LoadingEstimate mrts_loadings(const MatrixSeries& series, int k1, int k2, int threads = 1);

/// Closed-form factor scores F_hat_t = R_hat^T X_t C_hat / (p1 p2) for every t.
FactorFit mrts_factors(const MatrixSeries& series, const LoadingEstimate& loadings,
                       bool with_common = true);

/// Eigenvalue-ratio rank selection on the Kendall spectra, with the ridge
/// regularizers delta1 = 1/sqrt(min(p2, T^(1-epsilon))) (row side) and
/// delta2 = 1/sqrt(min(p1, T^(1-epsilon))) (column side). Defaults: kmax 8,
/// c 0 (ridge off), epsilon 0.05.
std::pair<RankSelection, RankSelection> mker_ranks(const MatrixSeries& series, int kmax = 8,
                                                   double c = 0.0, double epsilon = 0.05,
                                                   int threads = 1);

/// Same selection applied to spectra that were already computed (e.g. the
/// ones recorded in a LoadingEstimate), avoiding a second Kendall pass.
std::pair<RankSelection, RankSelection> mker_ranks_from_spectra(
    const Eigen::VectorXd& row_values, const Eigen::VectorXd& col_values, Index T, Index p1,
    Index p2, int kmax = 8, double c = 0.0, double epsilon = 0.05);

/// Non-robust baseline: sqrt(p) times the leading eigenvectors of the
/// mean-centered second-moment matrices (1/(T p1 p2)) sum (X_t - Xbar)(X_t - Xbar)^T
/// and its column analogue.
LoadingEstimate apca_loadings(const MatrixSeries& series, int k1, int k2);

/// Eigenvalue-ratio selection on the second-moment spectra (c = 0, delta = 0).
std::pair<RankSelection, RankSelection> apca_ranks(const MatrixSeries& series, int kmax = 8);

/// Spectrum-reusing variant of apca_ranks.
std::pair<RankSelection, RankSelection> apca_ranks_from_spectra(
    const Eigen::VectorXd& row_values, const Eigen::VectorXd& col_values, int kmax = 8);

}  // namespace mktau
