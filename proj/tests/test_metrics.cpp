#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mktau/errors.hpp"
#include "mktau/metrics.hpp"
#include "oracles.hpp"

using mktau::DegenerateError;
using mktau::MatrixSeries;
using mktau::ParamError;
using mktau::ValidationError;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("subspace distance closed forms") {
  Eigen::MatrixXd e1(3, 1), e2(3, 1), mixed(3, 1);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  mixed << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0;
  CHECK(mktau::subspace_distance(e1, e1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(mktau::subspace_distance(e1, e2) == doctest::Approx(1.0).epsilon(1e-14));
  // 45 degree rotation: tr(P1 P2) = 1/2, distance sqrt(1 - 1/2).
  CHECK(mktau::subspace_distance(e1, mixed) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));
}

TEST_CASE("subspace distance is a span property") {
  std::mt19937_64 gen(70);
  Eigen::MatrixXd Q = oracle::random_orthogonal(6, gen).leftCols(2);
  Eigen::MatrixXd A(2, 2);
  A << 2.0, -1.0, 0.5, 3.0;   // invertible mixing, same column space
  CHECK(mktau::subspace_distance(Q, Q * A) < 1e-12);

  Eigen::MatrixXd other = oracle::random_orthogonal(6, gen).leftCols(2);
  const double d = mktau::subspace_distance(Q, other);
  CHECK(mktau::subspace_distance(other, Q) == doctest::Approx(d).epsilon(1e-12));
  CHECK(d >= 0.0);
  CHECK(d <= 1.0);
  // sqrt(p)-scaled loading matrices measure the same distance.
  CHECK(mktau::subspace_distance(std::sqrt(6.0) * Q, std::sqrt(6.0) * other) ==
        doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("subspace distance matches the explicit projector oracle") {
  std::mt19937_64 gen(71);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd Q1 = oracle::gaussian_matrix(7, 3, gen);
    Eigen::MatrixXd Q2 = oracle::gaussian_matrix(7, 2, gen);
    CHECK(mktau::subspace_distance(Q1, Q2) ==
          doctest::Approx(oracle::projection_distance(Q1, Q2)).epsilon(1e-10));
  }
}

TEST_CASE("subspace distance rejects rank deficient input") {
  Eigen::MatrixXd bad(4, 2);
  bad.col(0) << 1, 2, 3, 4;
  bad.col(1) = 2.0 * bad.col(0);
  Eigen::MatrixXd ok = Eigen::MatrixXd::Identity(4, 2);
  CHECK_THROWS_AS(mktau::subspace_distance(bad, ok), ValidationError);
  CHECK_THROWS_AS(mktau::subspace_distance(ok, bad), ValidationError);
  Eigen::MatrixXd wide(2, 3);
  wide.setIdentity();
  CHECK_THROWS_AS(mktau::subspace_distance(wide, wide), ParamError);
}

TEST_CASE("mse of a series against itself is zero") {
  MatrixSeries s = oracle::gaussian_series(5, 4, 3, 72);
  CHECK(mktau::mse_common(s, s) == 0.0);
}

TEST_CASE("mse closed form and symmetry") {
  MatrixSeries ones(1, 2, 2), zero(1, 2, 2);
  for (double& v : ones.data) v = 1.0;
  CHECK(mktau::mse_common(ones, zero) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mktau::mse_common(zero, ones) == doctest::Approx(1.0).epsilon(1e-15));

  MatrixSeries a = oracle::gaussian_series(4, 3, 5, 73);
  MatrixSeries b = oracle::gaussian_series(4, 3, 5, 74);
  double direct = 0.0;
  for (mktau::Index t = 0; t < 4; ++t)
    direct += (Eigen::MatrixXd(a.slice(t)) - Eigen::MatrixXd(b.slice(t))).squaredNorm();
  direct /= 4.0 * 3.0 * 5.0;
  CHECK(mktau::mse_common(a, b) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("mse rejects mismatched shapes") {
  MatrixSeries a(2, 3, 3), b(2, 3, 4), c(3, 3, 3);
  CHECK_THROWS_AS(mktau::mse_common(a, b), ParamError);
  CHECK_THROWS_AS(mktau::mse_common(a, c), ParamError);
}

TEST_CASE("pricing errors vanish for a perfect fit") {
  MatrixSeries s = oracle::gaussian_series(6, 3, 4, 75);
  mktau::PricingErrors pe = mktau::pricing_errors(s, s);
  CHECK(pe.mse == 0.0);
  CHECK(pe.rho == 0.0);
}

TEST_CASE("fitting the window mean gives rho one") {
  MatrixSeries s = oracle::gaussian_series(8, 3, 3, 76);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 3);
  for (mktau::Index t = 0; t < 8; ++t) mean += s.slice(t);
  mean /= 8.0;
  MatrixSeries fitted(8, 3, 3);
  for (mktau::Index t = 0; t < 8; ++t) fitted.slice(t) = mean;
  CHECK(mktau::pricing_errors(s, fitted).rho == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pricing errors hand fixture") {
  // actual (1,0), (3,2); fitted (1,1), (2,2). Residual squares 0+1 and 1+0.
  // MSE = 2 / (2*2*1) = 0.5. Mean actual (2,1); centered squares 1+1 and 1+1.
  // rho = 2 / 4 = 0.5.
  MatrixSeries actual(2, 2, 1), fitted(2, 2, 1);
  actual.at(0, 0, 0) = 1;
  actual.at(0, 1, 0) = 0;
  actual.at(1, 0, 0) = 3;
  actual.at(1, 1, 0) = 2;
  fitted.at(0, 0, 0) = 1;
  fitted.at(0, 1, 0) = 1;
  fitted.at(1, 0, 0) = 2;
  fitted.at(1, 1, 0) = 2;
  mktau::PricingErrors pe = mktau::pricing_errors(actual, fitted);
  CHECK(pe.mse == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pe.rho == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("rho is invariant to rescaling both series") {
  MatrixSeries actual = oracle::gaussian_series(5, 3, 4, 77);
  MatrixSeries fitted = oracle::gaussian_series(5, 3, 4, 78);
  const double rho = mktau::pricing_errors(actual, fitted).rho;
  for (double& v : actual.data) v *= 10.0;
  for (double& v : fitted.data) v *= 10.0;
  CHECK(mktau::pricing_errors(actual, fitted).rho == doctest::Approx(rho).epsilon(1e-12));
}

TEST_CASE("a constant actual window has undefined rho") {
  MatrixSeries actual(3, 2, 2), fitted = oracle::gaussian_series(3, 2, 2, 79);
  for (double& v : actual.data) v = 4.2;
  CHECK_THROWS_AS(mktau::pricing_errors(actual, fitted), DegenerateError);
}

TEST_CASE("loading variation is zero for identical spaces") {
  std::mt19937_64 gen(80);
  Eigen::MatrixXd R = std::sqrt(5.0) * oracle::random_orthogonal(5, gen).leftCols(2);
  Eigen::MatrixXd C = std::sqrt(4.0) * oracle::random_orthogonal(4, gen).leftCols(2);
  CHECK(mktau::loading_variation(R, C, R, C) < 1e-12);

  // Rotating within the factor space does not move the joint span.
  Eigen::MatrixXd rot = oracle::random_orthogonal(2, gen);
  CHECK(mktau::loading_variation(R, C, R * rot, C * rot) < 1e-10);
}

TEST_CASE("loading variation reaches one for orthogonal spaces") {
  Eigen::MatrixXd R_prev(3, 1), R_curr(3, 1), C(2, 1);
  R_prev << 1, 0, 0;
  R_curr << 0, 1, 0;
  C << 1, 0;
  // kron(C, R_prev) and kron(C, R_curr) are orthogonal unit vectors.
  CHECK(mktau::loading_variation(R_prev, C, R_curr, C) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loading variation matches the kronecker subspace distance") {
  std::mt19937_64 gen(81);
  Eigen::MatrixXd R_prev = oracle::gaussian_matrix(4, 2, gen);
  Eigen::MatrixXd C_prev = oracle::gaussian_matrix(3, 2, gen);
  Eigen::MatrixXd R_curr = oracle::gaussian_matrix(4, 2, gen);
  Eigen::MatrixXd C_curr = oracle::gaussian_matrix(3, 2, gen);
  auto kron = [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j)
        K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
  };
  const double expected = mktau::subspace_distance(kron(C_prev, R_prev), kron(C_curr, R_curr));
  CHECK(mktau::loading_variation(R_prev, C_prev, R_curr, C_curr) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_SUITE_END();
