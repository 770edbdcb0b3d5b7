#include "mktau/spectral.hpp"

#include <cmath>

namespace mktau {
namespace {

void check_symmetric(const Eigen::MatrixXd& mat, const char* who) {
  if (mat.rows() != mat.cols() || mat.rows() < 1)
    throw ParamError(std::string(who) + ": matrix must be square and non-empty");
  if (!mat.allFinite())
    throw ValidationError(std::string(who) + ": matrix has non-finite entries");
  double dev = (mat - mat.transpose()).cwiseAbs().maxCoeff();
  if (dev > 1e-8)
    throw ValidationError(std::string(who) + ": matrix asymmetric beyond 1e-8 (max dev " +
                          std::to_string(dev) + ")");
}

// Largest-|entry| index, first on ties; flips the column if that entry is negative.
void apply_sign_rule(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index idx = 0;
    double best = std::abs(vectors(0, c));
    for (Eigen::Index r = 1; r < vectors.rows(); ++r) {
      double a = std::abs(vectors(r, c));
      if (a > best) {
        best = a;
        idx = r;
      }
    }
    if (vectors(idx, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

Eigen::MatrixXd sqrt_from_decomp(const EigenDecomp& d) {
  Eigen::VectorXd roots = d.values.cwiseMax(0.0).cwiseSqrt();
  return d.vectors * roots.asDiagonal() * d.vectors.transpose();
}

}  // namespace

EigenDecomp sym_eigen(const Eigen::MatrixXd& mat) {
  check_symmetric(mat, "sym_eigen");
  // Solve on the symmetrized matrix so 1e-8-level asymmetry cannot leak through.
  Eigen::MatrixXd sym = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw DegenerateError("sym_eigen: eigendecomposition did not converge");

  const Eigen::Index p = mat.rows();
  EigenDecomp out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  // Eigen sorts ascending; the convention here is non-increasing.
  for (Eigen::Index j = 0; j < p; ++j) {
    out.values(j) = solver.eigenvalues()(p - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  }
  apply_sign_rule(out.vectors);
  return out;
}

RankSelection ratio_rank(const Eigen::VectorXd& values, int kmax, double c, double delta,
                         double epsilon) {
  if (kmax < 1) throw ParamError("ratio_rank: kmax must be >= 1");
  if (values.size() < kmax + 1)
    throw ParamError("ratio_rank: need at least kmax + 1 eigenvalues, got " +
                     std::to_string(values.size()));
  if (c < 0.0 || delta < 0.0)
    throw ParamError("ratio_rank: c and delta must be non-negative");
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values(j)) || values(j) < -1e-10)
      throw ParamError("ratio_rank: eigenvalues must be non-negative (roundoff tolerance 1e-10)");
    if (j + 1 < values.size() && values(j) < values(j + 1))
      throw ParamError("ratio_rank: eigenvalues must be non-increasing");
  }

  const double ridge = c * delta;
  RankSelection sel;
  sel.ratios.resize(kmax);
  sel.delta = delta;
  sel.c = c;
  sel.epsilon = epsilon;
  sel.kmax = kmax;
  int best_j = 1;
  double best_ratio = -1.0;
  for (int j = 1; j <= kmax; ++j) {
    double num = std::max(values(j - 1), 0.0) + ridge;
    double den = std::max(values(j), 0.0) + ridge;
    // den >= ridge, so a zero denominator can only happen with c*delta = 0.
    if (den == 0.0)
      throw DegenerateError("ratio_rank: zero eigenvalue denominator at position " +
                            std::to_string(j + 1) + " with no ridge (c*delta = 0)");
    double ratio = num / den;
    sel.ratios[j - 1] = ratio;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_j = j;
    }
  }
  sel.k_hat = best_j;
  return sel;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& mat) {
  EigenDecomp d = sym_eigen(mat);
  if (d.values.minCoeff() < -1e-10)
    throw ParamError("psd_sqrt: matrix is not positive semidefinite (min eigenvalue " +
                     std::to_string(d.values.minCoeff()) + ")");
  return sqrt_from_decomp(d);
}

Eigen::MatrixXd pd_sqrt(const Eigen::MatrixXd& mat) {
  EigenDecomp d = sym_eigen(mat);
  if (d.values.minCoeff() < 1e-12)
    throw ParamError("pd_sqrt: matrix is not positive definite (min eigenvalue " +
                     std::to_string(d.values.minCoeff()) + ")");
  return sqrt_from_decomp(d);
}

}  // namespace mktau
