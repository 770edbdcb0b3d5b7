#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mktau/common.hpp"
#include "mktau/elliptical_sim.hpp"
#include "mktau/metrics.hpp"
#include "mktau/mrts.hpp"
#include "mktau/spectral.hpp"
#include "mktau/tensor_io.hpp"

namespace mktau {

/// Resolved configuration for one command run. The CLI fills this from
/// defaults, then an optional key=value config file, then flags (flags win);
/// every report echoes the effective values as "# key=value" header lines.
struct RunConfig {
  std::string subcommand;

  // Scenario grid (simulate, bench).
  char scenario = 'A';                  // A: phi=psi=0, B: phi=psi=0.1
  Dist dist = Dist::normal;
  unsigned nu = 0;
  Index T = 50;
  Index p1 = 50;
  Index p2 = 50;
  int k1 = 3;
  int k2 = 3;
  double phi = 0.0;
  double psi = 0.0;
  int reps = 100;
  std::vector<Method> methods = {Method::mrts};
  bool fixed_loadings = false;          // one loading draw shared by all replications

  // Rank selection.
  int kmax = 8;
  double ridge_c = 0.0;
  double epsilon = 0.05;
  std::vector<std::string> selectors = {"mker", "apca"};   // rank command

  // Estimation on a stored dataset.
  std::filesystem::path input;
  SeriesFormat in_format = SeriesFormat::long_csv;
  bool auto_rank = false;

  // Rolling validation.
  int window = 0;
  int block = 0;
  Method roll_method = Method::mrts;
  bool identity_fit_hook = false;       // test hook: fitted window := actual window

  // Benchmark grid.
  std::vector<Index> bench_T = {40, 80};
  std::vector<Index> bench_p = {20, 40};
  int bench_reps = 3;

  // Common.
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Applies the scenario tag: A sets phi = psi = 0, B sets phi = psi = 0.1.
void apply_scenario(RunConfig& config);

/// Per-replication seed: an independent stream keyed by (master seed, rep).
std::uint64_t replication_seed(std::uint64_t master_seed, int rep);

/// One per-replication result row of the simulate command.
struct SimRepRow {
  int rep = 0;
  Method method = Method::mrts;
  double D_R = 0.0;
  double D_C = 0.0;
  double mse = 0.0;
  int khat1 = 0;
  int khat2 = 0;
  std::uint64_t seed = 0;
};

/// Aggregate over replications for one method: means with ddof-1 standard
/// deviations, plus exact/under rank-recovery frequencies.
struct SimAggregate {
  Method method = Method::mrts;
  int reps = 0;
  double mean_D_R = 0.0, sd_D_R = 0.0;
  double mean_D_C = 0.0, sd_D_C = 0.0;
  double mean_mse = 0.0, sd_mse = 0.0;
  double freq_exact = 0.0;   // both ranks recovered exactly
  double freq_under = 0.0;   // either rank underestimated
};

struct SimulateResult {
  std::vector<SimRepRow> rows;               // replication-major, method order within
  std::vector<SimAggregate> aggregates;      // one per configured method
  std::filesystem::path per_rep_path;
  std::filesystem::path aggregate_path;
};

/// Monte-Carlo study: per (replication x method), generates a scenario, fits
/// loadings/factors with the true ranks, records subspace distances, common
/// component MSE, and the method's own rank selection. Replications run
/// concurrently on independent rng streams; rows are emitted in replication
/// order, so output bytes do not depend on the thread count.
SimulateResult cmd_simulate(const RunConfig& config);

struct EstimateResult {
  FactorFit fit;
  int khat1 = 0, khat2 = 0;                  // equal to k1/k2 unless auto_rank
  std::filesystem::path loadings_R_path, loadings_C_path, factors_path, common_path,
      metadata_path;
};

/// Fits one stored dataset and writes loadings (long-csv), factor scores
/// (long-csv), common components (mkt-binary), and a JSON metadata record.
EstimateResult cmd_estimate(const RunConfig& config);

struct RankTrace {
  std::string selector;    // "mker" or "apca"
  RankSelection row;
  RankSelection col;
};

struct RankResult {
  std::vector<RankTrace> traces;
  std::filesystem::path report_path;
};

/// Runs the configured selectors on a stored dataset and emits the full
/// eigenvalue/ratio traces with the selections.
RankResult cmd_rank(const RunConfig& config);

/// Rolling validation: windows of `window` observations fit the loadings,
/// the following `block` observations are scored out-of-sample.
RollingReport cmd_rolling(const RunConfig& config);

struct BenchRow {
  Index T = 0, p = 0;                // one row per grid cell, p1 = p2 = p
  double kendall_seconds = 0.0;      // median over bench_reps runs
  double fit_seconds = 0.0;          // full fit: loadings + factors + common
  double kendall_slope_T = 0.0;      // log-log slope across the T grid at this p
  double fit_slope_T = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::filesystem::path report_path;
};

/// Times the Kendall pass and the full fit across the T/p grid.
BenchResult cmd_bench(const RunConfig& config);

/// CLI exit code for a failure: config 2, data/format 3, numerical 4.
int exit_code_for(const std::exception& e);

}  // namespace mktau
