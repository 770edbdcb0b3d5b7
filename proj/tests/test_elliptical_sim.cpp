#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mktau/elliptical_sim.hpp"
#include "mktau/errors.hpp"
#include "oracles.hpp"

using mktau::Dist;
using mktau::GroundTruth;
using mktau::MatrixSeries;
using mktau::ParamError;
using mktau::Rng;
using mktau::ScenarioSpec;

namespace {

ScenarioSpec base_spec() {
  ScenarioSpec spec;
  spec.T = 20;
  spec.p1 = 5;
  spec.p2 = 4;
  spec.k1 = 2;
  spec.k2 = 2;
  spec.dist = Dist::normal;
  spec.seed = 101;
  return spec;
}

double lag1_autocorr(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < x.size()) num += (x[i] - mean) * (x[i + 1] - mean);
  }
  return num / den;
}

}  // namespace

TEST_SUITE_BEGIN("elliptical_sim");

TEST_CASE("equicorrelation matrix matches the closed forms") {
  Eigen::MatrixXd C2 = mktau::corr_matrix(2, 0.5);
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0.5, 0.5, 1;
  CHECK((C2 - expected).cwiseAbs().maxCoeff() == 0.0);

  // p=3 with offdiag 1/3: eigenvalues 5/3 and 2/3 (twice).
  Eigen::MatrixXd C3 = mktau::corr_matrix(3, 1.0 / 3.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C3);
  CHECK(es.eigenvalues()(2) == doctest::Approx(5.0 / 3.0).epsilon(1e-13));
  CHECK(es.eigenvalues()(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(es.eigenvalues()(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

  CHECK_THROWS_AS(mktau::corr_matrix(2, 1.5), ParamError);
  CHECK_THROWS_AS(mktau::corr_matrix(3, -0.5), ParamError);  // below -1/(p-1)
  CHECK(mktau::corr_matrix(1, 0.9)(0, 0) == 1.0);
}

TEST_CASE("matrix normal sampling realizes the kronecker covariance") {
  Rng rng(102);
  const int n = 10000;
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd Z = mktau::sample_matrix_normal(2, 2, I2, I2, rng);
    Eigen::Map<Eigen::VectorXd> v(Z.data(), 4);
    acc += v * v.transpose();
  }
  acc /= n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acc - Eigen::MatrixXd::Identity(4, 4));
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("matrix normal row scatter scales row variances") {
  Rng rng(103);
  Eigen::MatrixXd U = Eigen::Vector2d(4, 1).asDiagonal();
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(3, 3);
  double var_row0 = 0.0, var_row1 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd Z = mktau::sample_matrix_normal(2, 3, U, V, rng);
    var_row0 += Z.row(0).squaredNorm();
    var_row1 += Z.row(1).squaredNorm();
  }
  var_row0 /= 3 * n;
  var_row1 /= 3 * n;
  CHECK(var_row0 == doctest::Approx(4.0).epsilon(0.05));
  CHECK(var_row1 == doctest::Approx(1.0).epsilon(0.05));

  CHECK_THROWS_AS(
      mktau::sample_matrix_normal(2, 2, -Eigen::MatrixXd::Identity(2, 2), V, rng),
      ParamError);
}

TEST_CASE("matrix normal sampling is deterministic in the generator state") {
  Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  Rng a(104), b(104);
  Eigen::MatrixXd Za = mktau::sample_matrix_normal(3, 3, I3, I3, a);
  Eigen::MatrixXd Zb = mktau::sample_matrix_normal(3, 3, I3, I3, b);
  CHECK((Za - Zb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("normal innovations have independent factor and noise blocks") {
  ScenarioSpec spec = base_spec();
  spec.k1 = spec.k2 = 1;
  spec.p1 = 2;
  spec.p2 = 2;
  Eigen::MatrixXd U_E = mktau::corr_matrix(2, 0.5);
  Eigen::MatrixXd V_E = mktau::corr_matrix(2, 0.5);
  Rng rng(105);
  const int n = 10000;
  double eps_mean = 0.0;
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i) {
    auto [eps, noise] = mktau::sample_joint_innovation(spec, U_E, V_E, rng);
    eps_mean += eps(0, 0);
    cross += eps(0, 0) * Eigen::Map<Eigen::VectorXd>(noise.data(), 4);
  }
  CHECK(cross.cwiseAbs().maxCoeff() / n < 0.05);
  CHECK(std::abs(eps_mean / n) < 0.05);
}

TEST_CASE("joint t innovations share one mixing scalar across blocks") {
  ScenarioSpec spec = base_spec();
  spec.k1 = spec.k2 = 2;
  spec.p1 = spec.p2 = 2;
  Eigen::MatrixXd U_E = mktau::corr_matrix(2, 0.5);
  Eigen::MatrixXd V_E = mktau::corr_matrix(2, 0.5);

  // Sample correlation between log block magnitudes: strongly positive under
  // the shared t(1) scalar, near zero under independence (normal).
  auto log_mag_corr = [&](Dist dist, unsigned nu, std::uint64_t seed) {
    ScenarioSpec s = spec;
    s.dist = dist;
    s.nu = nu;
    Rng rng(seed);
    const int n = 20000;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      auto [eps, noise] = mktau::sample_joint_innovation(s, U_E, V_E, rng);
      a[static_cast<std::size_t>(i)] = std::log(eps.norm());
      b[static_cast<std::size_t>(i)] = std::log(noise.norm());
    }
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
      ma += a[static_cast<std::size_t>(i)];
      mb += b[static_cast<std::size_t>(i)];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, va = 0.0, vb = 0.0;
    for (int i = 0; i < n; ++i) {
      const double da = a[static_cast<std::size_t>(i)] - ma;
      const double db = b[static_cast<std::size_t>(i)] - mb;
      num += da * db;
      va += da * da;
      vb += db * db;
    }
    return num / std::sqrt(va * vb);
  };

  CHECK(log_mag_corr(Dist::student_t, 1, 106) > 0.3);
  CHECK(std::abs(log_mag_corr(Dist::normal, 0, 107)) < 0.05);
}

TEST_CASE("t innovations are heavy tailed") {
  ScenarioSpec spec = base_spec();
  spec.dist = Dist::student_t;
  spec.nu = 3;
  spec.k1 = spec.k2 = 1;
  spec.p1 = spec.p2 = 1;
  Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  Rng rng(108);
  const int n = 50000;
  double m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto [eps, noise] = mktau::sample_joint_innovation(spec, one, one, rng);
    (void)noise;
    const double x = eps(0, 0);
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= n;
  m4 /= n;
  CHECK(m4 / (m2 * m2) - 3.0 > 1.0);  // excess kurtosis well above Gaussian
}

TEST_CASE("scenario generation is reproducible and self consistent") {
  ScenarioSpec spec = base_spec();
  auto [X1, truth1] = mktau::generate_scenario(spec);
  auto [X2, truth2] = mktau::generate_scenario(spec);
  CHECK(X1 == X2);
  CHECK((truth1.R - truth2.R).cwiseAbs().maxCoeff() == 0.0);
  CHECK((truth1.C - truth2.C).cwiseAbs().maxCoeff() == 0.0);

  CHECK(truth1.R.cwiseAbs().maxCoeff() <= 1.0);  // uniform [-1,1] loadings
  CHECK(truth1.C.cwiseAbs().maxCoeff() <= 1.0);
  REQUIRE(truth1.F.size() == static_cast<std::size_t>(spec.T));
  REQUIRE(truth1.E.size() == static_cast<std::size_t>(spec.T));

  for (mktau::Index t = 0; t < spec.T; ++t) {
    // Decomposition identities: S_t is the loading product and X - S == E
    // holds bit-exactly by construction.
    Eigen::MatrixXd S =
        truth1.R * truth1.F[static_cast<std::size_t>(t)] * truth1.C.transpose();
    CHECK((Eigen::MatrixXd(truth1.S.slice(t)) - S).cwiseAbs().maxCoeff() == 0.0);
    Eigen::MatrixXd residual = Eigen::MatrixXd(X1.slice(t)) - S;
    CHECK((residual - truth1.E[static_cast<std::size_t>(t)]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("different seeds move the draw while a shared loading seed pins loadings") {
  ScenarioSpec a = base_spec(), b = base_spec();
  b.seed = a.seed + 1;
  a.loading_seed = 777;
  b.loading_seed = 777;
  auto [Xa, ta] = mktau::generate_scenario(a);
  auto [Xb, tb] = mktau::generate_scenario(b);
  CHECK((ta.R - tb.R).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ta.C - tb.C).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(Xa == Xb);
}

TEST_CASE("iid factors show no lag one autocorrelation") {
  ScenarioSpec spec = base_spec();
  spec.T = 500;
  spec.k1 = spec.k2 = 1;
  auto [X, truth] = mktau::generate_scenario(spec);
  (void)X;
  std::vector<double> f(static_cast<std::size_t>(spec.T));
  for (mktau::Index t = 0; t < spec.T; ++t)
    f[static_cast<std::size_t>(t)] = truth.F[static_cast<std::size_t>(t)](0, 0);
  CHECK(std::abs(lag1_autocorr(f)) < 0.1);
}

TEST_CASE("ar factors show the configured lag one autocorrelation") {
  ScenarioSpec spec = base_spec();
  spec.T = 5000;
  spec.k1 = spec.k2 = 1;
  spec.phi = 0.1;
  auto [X, truth] = mktau::generate_scenario(spec);
  (void)X;
  std::vector<double> f(static_cast<std::size_t>(spec.T));
  for (mktau::Index t = 0; t < spec.T; ++t)
    f[static_cast<std::size_t>(t)] = truth.F[static_cast<std::size_t>(t)](0, 0);
  CHECK(lag1_autocorr(f) == doctest::Approx(0.1).epsilon(0.5));  // 0.1 +- 0.05
}

TEST_CASE("ar scaling keeps the stationary factor variance at one") {
  ScenarioSpec spec = base_spec();
  spec.T = 10000;
  spec.k1 = spec.k2 = 1;
  spec.phi = 0.5;
  auto [X, truth] = mktau::generate_scenario(spec);
  (void)X;
  double m = 0.0, m2 = 0.0;
  for (const Eigen::MatrixXd& F : truth.F) {
    m += F(0, 0);
    m2 += F(0, 0) * F(0, 0);
  }
  m /= static_cast<double>(spec.T);
  m2 /= static_cast<double>(spec.T);
  CHECK(std::abs(m2 - m * m - 1.0) < 0.1);
}

TEST_CASE("scenario validation rejects out of range parameters") {
  ScenarioSpec spec = base_spec();
  spec.k1 = 6;  // > p1
  CHECK_THROWS_AS(mktau::generate_scenario(spec), ParamError);
  spec = base_spec();
  spec.phi = 1.0;
  CHECK_THROWS_AS(mktau::generate_scenario(spec), ParamError);
  spec = base_spec();
  spec.psi = -1.2;
  CHECK_THROWS_AS(mktau::generate_scenario(spec), ParamError);
  spec = base_spec();
  spec.dist = Dist::student_t;
  spec.nu = 0;
  CHECK_THROWS_AS(mktau::generate_scenario(spec), ParamError);
  spec = base_spec();
  spec.T = 0;
  CHECK_THROWS_AS(mktau::generate_scenario(spec), ParamError);
}

TEST_SUITE_END();
