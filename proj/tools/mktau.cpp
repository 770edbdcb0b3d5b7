// mktau: matrix Kendall's tau factor modeling toolkit.
//
// Subcommands: simulate (Monte-Carlo study), estimate (fit one stored
// dataset), rank (factor-number selection traces), rolling (out-of-sample
// validation), bench (timing grid). Every report echoes the effective
// configuration as "# key=value" lines; exit codes are 0 ok, 2 config error,
// 3 data/format error, 4 numerical degeneracy.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mktau/harness.hpp"

namespace {

using mktau::RunConfig;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Deferred string slots: CLI11 fills these during parse, finalize() converts
// and validates them into the typed RunConfig.
struct RawOptions {
  std::string scenario = "A";
  std::string dist = "normal";
  std::string methods = "mrts";
  std::string method = "mrts";
  std::string format = "long-csv";
  std::string selectors = "mker,apca";
  std::string input;
  std::string out_dir = ".";
};

void add_common(CLI::App& cmd, RunConfig& config, RawOptions& raw) {
  cmd.add_option("--seed", config.seed, "Master seed (default 1)");
  cmd.add_option("--threads", config.threads, "Worker thread count (default 1)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", raw.out_dir, "Output directory (default .)");
}

void add_input(CLI::App& cmd, RawOptions& raw) {
  cmd.add_option("--input", raw.input, "Input series path")->required();
  cmd.add_option("--format", raw.format, "Input format: long-csv | mkt-binary");
}

void add_rank_params(CLI::App& cmd, RunConfig& config) {
  cmd.add_option("--kmax", config.kmax, "Rank search ceiling (default 8)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--ridge-c", config.ridge_c, "Eigenvalue-ratio ridge constant (default 0)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--epsilon", config.epsilon, "Ridge exponent parameter (default 0.05)")
      ->check(CLI::Range(0.0, 1.0));
}

void finalize(const CLI::App& cmd, RunConfig& config, const RawOptions& raw) {
  config.out_dir = raw.out_dir;

  if (config.subcommand == "simulate" || config.subcommand == "bench") {
    if (raw.scenario.size() != 1) throw mktau::ParamError("scenario must be A or B");
    config.scenario = raw.scenario[0];
    // The scenario preset for phi/psi; explicit --phi/--psi (simulate only)
    // are restored on top by the caller.
    const double phi_flag = config.phi, psi_flag = config.psi;
    mktau::apply_scenario(config);
    const CLI::Option* phi = cmd.get_option_no_throw("--phi");
    const CLI::Option* psi = cmd.get_option_no_throw("--psi");
    if (phi != nullptr && phi->count() > 0) config.phi = phi_flag;
    if (psi != nullptr && psi->count() > 0) config.psi = psi_flag;
    auto [dist, nu] = mktau::parse_dist(raw.dist);
    config.dist = dist;
    config.nu = nu;
  }
  if (config.subcommand == "simulate") {
    config.methods.clear();
    for (const std::string& name : split_list(raw.methods))
      config.methods.push_back(mktau::parse_method(name));
    if (config.methods.empty())
      throw mktau::ParamError("--methods must name at least one of mrts, apca");
  }
  if (!raw.input.empty()) {
    config.input = raw.input;
    if (raw.format == "long-csv") {
      config.in_format = mktau::SeriesFormat::long_csv;
    } else if (raw.format == "mkt-binary") {
      config.in_format = mktau::SeriesFormat::mkt_binary;
    } else {
      throw mktau::ParamError("unknown format '" + raw.format +
                              "' (expected long-csv or mkt-binary)");
    }
  }
  if (config.subcommand == "estimate" || config.subcommand == "rolling")
    config.roll_method = mktau::parse_method(raw.method);
  if (config.subcommand == "rank") {
    config.selectors = split_list(raw.selectors);
    if (config.selectors.empty())
      throw mktau::ParamError("--selectors must name at least one of mker, apca");
  }
  (void)cmd;
}

void print_paths(const char* label, const std::filesystem::path& path) {
  std::printf("%s: %s\n", label, path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix Kendall's tau factor modeling toolkit"};
  app.set_version_flag("--version", "mktau 1.0.0");
  app.require_subcommand(1);
  // Config processing only runs on the top-level app, so the flag lives here:
  // mktau --config run.cfg <subcommand> ..., with keys under a [subcommand]
  // section. Explicit flags always win over file values.
  app.set_config("--config", "",
                 "key=value config file; keys go in a [subcommand] section, flags win");

  RunConfig config;
  RawOptions raw;

  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo scenario study");
  add_common(*simulate, config, raw);
  simulate->add_option("--scenario", raw.scenario, "Scenario: A (iid) or B (AR factors)");
  simulate->add_option("--dist", raw.dist, "Innovations: normal | t1 | t2 | t3 | t<nu>");
  simulate->add_option("--T", config.T, "Series length (default 50)");
  simulate->add_option("--p1", config.p1, "Row dimension (default 50)");
  simulate->add_option("--p2", config.p2, "Column dimension (default 50)");
  simulate->add_option("--k1", config.k1, "True row rank (default 3)");
  simulate->add_option("--k2", config.k2, "True column rank (default 3)");
  simulate->add_option("--reps", config.reps, "Replication count (default 100)");
  simulate->add_option("--methods", raw.methods, "Estimators, comma list of mrts, apca");
  simulate->add_flag("--fixed-loadings", config.fixed_loadings,
                     "Share one loading draw across replications");
  simulate->add_option("--phi", config.phi, "Factor AR(1) coefficient override");
  simulate->add_option("--psi", config.psi, "Noise AR(1) coefficient override");
  add_rank_params(*simulate, config);

  CLI::App* estimate = app.add_subcommand("estimate", "Fit one stored dataset");
  add_common(*estimate, config, raw);
  add_input(*estimate, raw);
  estimate->add_option("--method", raw.method, "Estimator: mrts | apca");
  estimate->add_option("--k1", config.k1, "Row rank (ignored with --auto-rank)");
  estimate->add_option("--k2", config.k2, "Column rank (ignored with --auto-rank)");
  estimate->add_flag("--auto-rank", config.auto_rank,
                     "Select ranks by the eigenvalue-ratio rule first");
  add_rank_params(*estimate, config);

  CLI::App* rank = app.add_subcommand("rank", "Factor-number selection traces");
  add_common(*rank, config, raw);
  add_input(*rank, raw);
  rank->add_option("--selectors", raw.selectors, "Comma list of mker, apca (default both)");
  add_rank_params(*rank, config);

  CLI::App* rolling = app.add_subcommand("rolling", "Rolling out-of-sample validation");
  add_common(*rolling, config, raw);
  add_input(*rolling, raw);
  rolling->add_option("--window", config.window, "Training window length")->required();
  rolling->add_option("--block", config.block, "Test block length")->required();
  rolling->add_option("--k1", config.k1, "Row rank (default 3)");
  rolling->add_option("--k2", config.k2, "Column rank (default 3)");
  rolling->add_option("--method", raw.method, "Estimator: mrts | apca");

  CLI::App* bench = app.add_subcommand("bench", "Timing grid for kendall and the full fit");
  add_common(*bench, config, raw);
  bench->add_option("--scenario", raw.scenario, "Scenario for the timing data");
  bench->add_option("--dist", raw.dist, "Innovation distribution for the timing data");
  bench->add_option("--bench-T", config.bench_T, "T grid (default 40,80)")
      ->delimiter(',');
  bench->add_option("--bench-p", config.bench_p, "p1=p2 grid (default 20,40)")
      ->delimiter(',');
  bench->add_option("--bench-reps", config.bench_reps,
                    "Timing repetitions per cell, median kept (default 3)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    // CLI11 help/version report success; every other parse failure is a
    // configuration error.
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = app.get_subcommands().front();
  config.subcommand = active->get_name();

  try {
    finalize(*active, config, raw);
    if (config.subcommand == "simulate") {
      mktau::SimulateResult result = mktau::cmd_simulate(config);
      print_paths("replications", result.per_rep_path);
      print_paths("aggregate", result.aggregate_path);
      for (const mktau::SimAggregate& agg : result.aggregates)
        std::printf("%s: D_R %.6f D_C %.6f MSE %.6f exact %.2f\n",
                    mktau::to_string(agg.method).c_str(), agg.mean_D_R, agg.mean_D_C,
                    agg.mean_mse, agg.freq_exact);
    } else if (config.subcommand == "estimate") {
      mktau::EstimateResult result = mktau::cmd_estimate(config);
      std::printf("ranks: k1 %d k2 %d\n", result.khat1, result.khat2);
      print_paths("loadings_R", result.loadings_R_path);
      print_paths("loadings_C", result.loadings_C_path);
      print_paths("factors", result.factors_path);
      print_paths("common", result.common_path);
      print_paths("metadata", result.metadata_path);
    } else if (config.subcommand == "rank") {
      mktau::RankResult result = mktau::cmd_rank(config);
      for (const mktau::RankTrace& trace : result.traces)
        std::printf("%s: k1 %d k2 %d\n", trace.selector.c_str(), trace.row.k_hat,
                    trace.col.k_hat);
      print_paths("report", result.report_path);
    } else if (config.subcommand == "rolling") {
      mktau::RollingReport report = mktau::cmd_rolling(config);
      std::printf("windows: %zu mean MSE %.6f mean rho %.6f\n", report.rows.size(),
                  report.mean_mse, report.mean_rho);
      print_paths("report", config.out_dir / "rolling_report.csv");
    } else {
      mktau::BenchResult result = mktau::cmd_bench(config);
      print_paths("report", result.report_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return mktau::exit_code_for(e);
  }
  return 0;
}
