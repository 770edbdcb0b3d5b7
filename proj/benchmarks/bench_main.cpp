// Microbenchmarks for the numerical hot paths. The T- and p-ranged kendall
// benchmarks are the ground truth behind the complexity bands the bench
// subcommand asserts: O(T^2) in observations, O(p^2 max-dim) per pair.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "mktau/elliptical_sim.hpp"
#include "mktau/matrix_kendall.hpp"
#include "mktau/mrts.hpp"
#include "mktau/rng.hpp"
#include "mktau/spectral.hpp"

namespace {

mktau::MatrixSeries make_series(mktau::Index T, mktau::Index p) {
  mktau::ScenarioSpec spec;
  spec.T = T;
  spec.p1 = p;
  spec.p2 = p;
  spec.k1 = std::min<int>(3, static_cast<int>(p));
  spec.k2 = spec.k1;
  spec.seed = 12345;
  return mktau::generate_scenario(spec).first;
}

void bm_pair_kernel(benchmark::State& state) {
  const auto p = static_cast<mktau::Index>(state.range(0));
  mktau::Rng rng(7);
  Eigen::MatrixXd X(p, p), Xp(p, p);
  for (mktau::Index i = 0; i < p; ++i)
    for (mktau::Index j = 0; j < p; ++j) {
      X(i, j) = rng.normal();
      Xp(i, j) = rng.normal();
    }
  for (auto _ : state)
    benchmark::DoNotOptimize(mktau::pair_kernel(X, Xp, mktau::KendallSide::row));
}

void bm_kendall_T(benchmark::State& state) {
  mktau::MatrixSeries s = make_series(state.range(0), 30);
  for (auto _ : state)
    benchmark::DoNotOptimize(mktau::kendall(s, mktau::KendallSide::row));
  state.SetComplexityN(state.range(0));
}

void bm_kendall_p(benchmark::State& state) {
  mktau::MatrixSeries s = make_series(40, state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(mktau::kendall(s, mktau::KendallSide::row));
  state.SetComplexityN(state.range(0));
}

void bm_sym_eigen(benchmark::State& state) {
  const auto p = static_cast<mktau::Index>(state.range(0));
  mktau::MatrixSeries s = make_series(20, p);
  Eigen::MatrixXd K = mktau::kendall(s, mktau::KendallSide::row).mat;
  for (auto _ : state) benchmark::DoNotOptimize(mktau::sym_eigen(K));
}

void bm_full_fit(benchmark::State& state) {
  mktau::MatrixSeries s = make_series(state.range(0), state.range(1));
  for (auto _ : state) {
    mktau::LoadingEstimate est = mktau::mrts_loadings(s, 3, 3);
    benchmark::DoNotOptimize(mktau::mrts_factors(s, est, true));
  }
}

BENCHMARK(bm_pair_kernel)->Arg(20)->Arg(40)->Arg(80);
BENCHMARK(bm_kendall_T)->Arg(32)->Arg(64)->Arg(128)->Complexity(benchmark::oNSquared);
BENCHMARK(bm_kendall_p)->Arg(16)->Arg(32)->Arg(64)->Complexity(benchmark::oNCubed);
BENCHMARK(bm_sym_eigen)->Arg(30)->Arg(60);
BENCHMARK(bm_full_fit)->Args({50, 20})->Args({50, 50});

}  // namespace

BENCHMARK_MAIN();
