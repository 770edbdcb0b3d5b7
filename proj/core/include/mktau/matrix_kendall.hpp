#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "mktau/common.hpp"
#include "mktau/matrix_series.hpp"
#include "mktau/rng.hpp"

namespace mktau {

enum class KendallSide { row, column };

inline std::string to_string(KendallSide side) {
  return side == KendallSide::row ? "row" : "column";
}

/// Sample matrix Kendall's tau: a symmetric PSD matrix of trace 1 obtained by
/// averaging normalized squared differences over observation pairs.
struct KendallTau {
  KendallSide side = KendallSide::row;
  Index dim = 0;                  // p1 for row side, p2 for column side
  Eigen::MatrixXd mat;            // symmetric, eigenvalues >= -1e-10, trace 1 +- 1e-10
  std::int64_t pairs_used = 0;    // pairs actually averaged (degenerate pairs skipped)
};

/// Kernel of one observation pair: with D = X - Xp,
/// row side D D^T / ||D||_F^2, column side D^T D / ||D||_F^2.
/// PSD with trace exactly 1 and spectral norm <= 1. A zero difference is a
/// degenerate-pair error.
Eigen::MatrixXd pair_kernel(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xp,
                            KendallSide side);

/// Optional subsampling of the pair set: n_pairs distinct unordered pairs
/// drawn uniformly with the supplied generator instead of all T(T-1)/2.
struct Subsample {
  std::int64_t n_pairs = 0;
  Rng rng;
};

/// Averages pair_kernel over all unordered observation pairs (or a uniform
/// subsample). Tied observations are skipped and the denominator renormalized;
/// pairs_used reports the pairs actually included. The reduction runs over
/// fixed-size chunks combined in index order, so the result is bit-identical
/// for every thread count.
KendallTau kendall(const MatrixSeries& series, KendallSide side,
                   const std::optional<Subsample>& subsample = std::nullopt,
                   int threads = 1);

/// A matrix elliptical law E(0, Sigma kron Omega) for the Monte-Carlo oracle.
struct EllipticalLaw {
  Eigen::MatrixXd Sigma;   // p1 x p1 row scatter, PSD
  Eigen::MatrixXd Omega;   // p2 x p2 column scatter, PSD
  Dist dist = Dist::normal;
  unsigned nu = 0;         // degrees of freedom when dist == student_t
};

/// Monte-Carlo estimate of the population matrix Kendall's tau of the given
/// law: averages pair_kernel over n_pairs independent observation pairs.
/// Test-support oracle for eigenspace/ordering properties.
KendallTau population_kendall_mc(const EllipticalLaw& law, std::int64_t n_pairs, Rng& rng,
                                 KendallSide side = KendallSide::row);

}  // namespace mktau
