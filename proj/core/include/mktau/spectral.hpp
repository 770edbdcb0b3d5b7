#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mktau/errors.hpp"

namespace mktau {

/// Full symmetric eigendecomposition with fixed conventions:
/// values sorted non-increasing, vectors orthonormal and aligned with values,
/// each column sign-normalized so its entry of largest absolute value is
/// positive (first such index on ties).
struct EigenDecomp {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Decomposes a symmetric matrix (checked to 1e-8, finite entries required).
/// Reconstruction satisfies ||mat - V diag(values) V^T||_F <= 1e-9 * max(1, ||mat||_F).
EigenDecomp sym_eigen(const Eigen::MatrixXd& mat);

/// Result of the eigenvalue-ratio rank selector.
struct RankSelection {
  int k_hat = 0;                 // argmax_j of ratios, ties toward smallest j
  std::vector<double> ratios;    // length kmax, ratios[j-1] = lam_j / lam_{j+1}
  double delta = 0.0;            // regularizer added as c * delta
  double c = 0.0;                // ridge constant
  double epsilon = 0.0;          // exponent used by the caller to derive delta
  int kmax = 0;                  // search ceiling
};

/// Selects k_hat = argmax_{1<=j<=kmax} (values[j] + c*delta) / (values[j+1] + c*delta)
/// over a non-increasing, non-negative eigenvalue list (1-based in this comment).
/// A zero denominator with c*delta = 0 raises a degenerate-spectrum error.
/// epsilon is recorded in the result for report audit trails only.
RankSelection ratio_rank(const Eigen::VectorXd& values, int kmax, double c, double delta,
                         double epsilon = 0.0);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// -1e-10 are rejected; tiny negatives are clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& mat);

/// Symmetric PD square root: any eigenvalue below 1e-12 is an error.
Eigen::MatrixXd pd_sqrt(const Eigen::MatrixXd& mat);

}  // namespace mktau
