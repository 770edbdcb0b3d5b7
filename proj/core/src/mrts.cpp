#include "mktau/mrts.hpp"

#include <cmath>

#include "mktau/matrix_kendall.hpp"

namespace mktau {
namespace {

void check_ranks(const MatrixSeries& series, int k1, int k2) {
  if (series.T < 2) throw ParamError("loadings: need T >= 2 observations");
  if (k1 < 1 || k1 > series.p1 || k2 < 1 || k2 > series.p2)
    throw ParamError("loadings: ranks must satisfy 1 <= k1 <= p1 and 1 <= k2 <= p2");
}

// sqrt(p) times the leading k eigenvectors; flags a k-th spectral gap below 1e-10.
void fill_side(const EigenDecomp& decomp, int k, Eigen::MatrixXd& loading,
               Eigen::VectorXd& spectrum, bool& degenerate_gap) {
  const Index p = decomp.vectors.rows();
  loading = std::sqrt(static_cast<double>(p)) * decomp.vectors.leftCols(k);
  spectrum = decomp.values;
  degenerate_gap = k < p && (decomp.values(k - 1) - decomp.values(k)) < 1e-10;
}

// Analytic zeros of an exactly low-rank matrix come back from the eigensolver
// as values of either sign at roundoff scale; flooring them just above that
// scale keeps the ratio selector's denominators meaningful without touching
// any statistically relevant eigenvalue.
Eigen::VectorXd floored_spectrum(const Eigen::VectorXd& values) {
  double floor = 1e-12 * std::max(values.size() ? values(0) : 0.0, 0.0);
  return values.cwiseMax(floor);
}

std::pair<double, double> rank_deltas(Index T, Index p1, Index p2, double epsilon) {
  double t_pow = std::pow(static_cast<double>(T), 1.0 - epsilon);
  double delta1 = 1.0 / std::sqrt(std::min(static_cast<double>(p2), t_pow));
  double delta2 = 1.0 / std::sqrt(std::min(static_cast<double>(p1), t_pow));
  return {delta1, delta2};
}

}  // namespace

LoadingEstimate mrts_loadings(const MatrixSeries& series, int k1, int k2, int threads) {
  check_ranks(series, k1, k2);
  LoadingEstimate est;
  est.method = Method::mrts;
  EigenDecomp row = sym_eigen(kendall(series, KendallSide::row, std::nullopt, threads).mat);
  EigenDecomp col = sym_eigen(kendall(series, KendallSide::column, std::nullopt, threads).mat);
  fill_side(row, k1, est.R_hat, est.row_eigenvalues, est.degenerate_gap_row);
  fill_side(col, k2, est.C_hat, est.col_eigenvalues, est.degenerate_gap_col);
  return est;
}

FactorFit mrts_factors(const MatrixSeries& series, const LoadingEstimate& loadings,
                       bool with_common) {
  if (loadings.R_hat.rows() != series.p1 || loadings.C_hat.rows() != series.p2)
    throw ParamError("mrts_factors: loading dimensions do not match the series");
  if (loadings.R_hat.cols() < 1 || loadings.C_hat.cols() < 1)
    throw ParamError("mrts_factors: loadings must have at least one column");

  FactorFit fit;
  fit.loadings = loadings;
  fit.factors.reserve(static_cast<std::size_t>(series.T));
  const double scale = 1.0 / static_cast<double>(series.p1 * series.p2);
  if (with_common) fit.common = MatrixSeries(series.T, series.p1, series.p2);
  for (Index t = 0; t < series.T; ++t) {
    Eigen::MatrixXd F = scale * (loadings.R_hat.transpose() * series.slice(t) * loadings.C_hat);
    if (with_common)
      fit.common->slice(t) = loadings.R_hat * F * loadings.C_hat.transpose();
    fit.factors.push_back(std::move(F));
  }
  return fit;
}

std::pair<RankSelection, RankSelection> mker_ranks_from_spectra(
    const Eigen::VectorXd& row_values, const Eigen::VectorXd& col_values, Index T, Index p1,
    Index p2, int kmax, double c, double epsilon) {
  if (kmax < 1 || kmax + 1 > std::min(p1, p2))
    throw ParamError("mker_ranks: need 1 <= kmax and kmax + 1 <= min(p1, p2)");
  auto [delta1, delta2] = rank_deltas(T, p1, p2, epsilon);
  RankSelection row = ratio_rank(floored_spectrum(row_values), kmax, c, delta1, epsilon);
  RankSelection col = ratio_rank(floored_spectrum(col_values), kmax, c, delta2, epsilon);
  return {row, col};
}

std::pair<RankSelection, RankSelection> mker_ranks(const MatrixSeries& series, int kmax,
                                                   double c, double epsilon, int threads) {
  if (series.T < 2) throw ParamError("mker_ranks: need T >= 2 observations");
  if (kmax < 1 || kmax + 1 > std::min(series.p1, series.p2))
    throw ParamError("mker_ranks: need 1 <= kmax and kmax + 1 <= min(p1, p2)");
  EigenDecomp row = sym_eigen(kendall(series, KendallSide::row, std::nullopt, threads).mat);
  EigenDecomp col = sym_eigen(kendall(series, KendallSide::column, std::nullopt, threads).mat);
  return mker_ranks_from_spectra(row.values, col.values, series.T, series.p1, series.p2,
                                 kmax, c, epsilon);
}

LoadingEstimate apca_loadings(const MatrixSeries& series, int k1, int k2) {
  check_ranks(series, k1, k2);

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(series.p1, series.p2);
  for (Index t = 0; t < series.T; ++t) mean += series.slice(t);
  mean /= static_cast<double>(series.T);

  Eigen::MatrixXd row_acc = Eigen::MatrixXd::Zero(series.p1, series.p1);
  Eigen::MatrixXd col_acc = Eigen::MatrixXd::Zero(series.p2, series.p2);
  Eigen::MatrixXd centered;
  for (Index t = 0; t < series.T; ++t) {
    centered = series.slice(t) - mean;
    row_acc.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0);
    col_acc.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(), 1.0);
  }
  const double scale = 1.0 / static_cast<double>(series.T * series.p1 * series.p2);
  Eigen::MatrixXd row_mat = Eigen::MatrixXd(row_acc.selfadjointView<Eigen::Lower>()) * scale;
  Eigen::MatrixXd col_mat = Eigen::MatrixXd(col_acc.selfadjointView<Eigen::Lower>()) * scale;

  LoadingEstimate est;
  est.method = Method::apca;
  EigenDecomp row = sym_eigen(row_mat);
  EigenDecomp col = sym_eigen(col_mat);
  fill_side(row, k1, est.R_hat, est.row_eigenvalues, est.degenerate_gap_row);
  fill_side(col, k2, est.C_hat, est.col_eigenvalues, est.degenerate_gap_col);
  return est;
}

std::pair<RankSelection, RankSelection> apca_ranks_from_spectra(
    const Eigen::VectorXd& row_values, const Eigen::VectorXd& col_values, int kmax) {
  RankSelection row = ratio_rank(floored_spectrum(row_values), kmax, 0.0, 0.0, 0.0);
  RankSelection col = ratio_rank(floored_spectrum(col_values), kmax, 0.0, 0.0, 0.0);
  return {row, col};
}

std::pair<RankSelection, RankSelection> apca_ranks(const MatrixSeries& series, int kmax) {
  if (series.T < 2) throw ParamError("apca_ranks: need T >= 2 observations");
  if (kmax < 1 || kmax + 1 > std::min(series.p1, series.p2))
    throw ParamError("apca_ranks: need 1 <= kmax and kmax + 1 <= min(p1, p2)");
  LoadingEstimate est = apca_loadings(series, 1, 1);
  return apca_ranks_from_spectra(est.row_eigenvalues, est.col_eigenvalues, kmax);
}

}  // namespace mktau
