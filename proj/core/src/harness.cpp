#include "mktau/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include "mktau/matrix_kendall.hpp"

namespace mktau {
namespace {

namespace fs = std::filesystem;

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string methods_string(const std::vector<Method>& methods) {
  std::vector<std::string> names;
  names.reserve(methods.size());
  for (Method m : methods) names.push_back(to_string(m));
  return join(names, ',');
}

std::pair<double, double> rank_deltas(const RunConfig& c, Index T, Index p1, Index p2) {
  double t_pow = std::pow(static_cast<double>(T), 1.0 - c.epsilon);
  return {1.0 / std::sqrt(std::min(static_cast<double>(p2), t_pow)),
          1.0 / std::sqrt(std::min(static_cast<double>(p1), t_pow))};
}

// "# key=value" header lines recording the effective configuration. Only
// result-determining values are echoed: the thread count and output paths do
// not influence any emitted number, and leaving them out keeps reruns of the
// same experiment byte-identical regardless of where or how wide they ran.
std::vector<std::string> config_echo(const RunConfig& c) {
  std::vector<std::string> lines;
  auto add = [&](const std::string& key, const std::string& value) {
    lines.push_back(key + "=" + value);
  };
  add("command", c.subcommand);
  add("seed", std::to_string(c.seed));
  if (c.subcommand == "simulate" || c.subcommand == "bench") {
    add("scenario", std::string(1, c.scenario));
    add("dist", to_string(c.dist, c.nu));
    add("phi", format_double(c.phi));
    add("psi", format_double(c.psi));
  }
  if (c.subcommand == "simulate") {
    add("T", std::to_string(c.T));
    add("p1", std::to_string(c.p1));
    add("p2", std::to_string(c.p2));
    add("k1", std::to_string(c.k1));
    add("k2", std::to_string(c.k2));
    add("reps", std::to_string(c.reps));
    add("methods", methods_string(c.methods));
    add("fixed_loadings", c.fixed_loadings ? "1" : "0");
  }
  if (!c.input.empty()) {
    add("input", c.input.string());
    add("format", c.in_format == SeriesFormat::long_csv ? "long-csv" : "mkt-binary");
  }
  if (c.subcommand == "simulate" || c.subcommand == "rank" || c.subcommand == "estimate") {
    add("kmax", std::to_string(c.kmax));
    add("ridge_c", format_double(c.ridge_c));
    add("epsilon", format_double(c.epsilon));
  }
  if (c.subcommand == "rank") add("selectors", join(c.selectors, ','));
  if (c.subcommand == "rolling") {
    add("window", std::to_string(c.window));
    add("block", std::to_string(c.block));
    add("k1", std::to_string(c.k1));
    add("k2", std::to_string(c.k2));
    add("method", to_string(c.roll_method));
  }
  if (c.subcommand == "bench") {
    std::vector<std::string> ts, ps;
    for (Index v : c.bench_T) ts.push_back(std::to_string(v));
    for (Index v : c.bench_p) ps.push_back(std::to_string(v));
    add("bench_T", join(ts, ','));
    add("bench_p", join(ps, ','));
    add("bench_reps", std::to_string(c.bench_reps));
  }
  return lines;
}

// Rank-parameter echo for commands whose reports depend on (c, epsilon, delta).
void add_delta_echo(std::vector<std::string>& lines, const RunConfig& c, Index T, Index p1,
                    Index p2) {
  auto [delta1, delta2] = rank_deltas(c, T, p1, p2);
  lines.push_back("delta1=" + format_double(delta1));
  lines.push_back("delta2=" + format_double(delta2));
}

void ensure_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec || !fs::is_directory(c.out_dir))
    throw IoError("cannot create output directory '" + c.out_dir.string() + "'");
}

void require_input(const RunConfig& c) {
  if (c.input.empty()) throw ParamError(c.subcommand + ": --input is required");
  // A path that points nowhere is an input-data failure, same class as a file
  // that fails to parse, not a flag-usage error.
  if (!fs::exists(c.input))
    throw IoError(c.subcommand + ": input path '" + c.input.string() + "' does not exist");
}

ScenarioSpec spec_for_rep(const RunConfig& c, int rep, std::uint64_t fixed_loading_seed) {
  ScenarioSpec spec;
  spec.T = c.T;
  spec.p1 = c.p1;
  spec.p2 = c.p2;
  spec.k1 = c.k1;
  spec.k2 = c.k2;
  spec.dist = c.dist;
  spec.nu = c.nu;
  spec.phi = c.phi;
  spec.psi = c.psi;
  spec.seed = replication_seed(c.seed, rep);
  if (c.fixed_loadings) spec.loading_seed = fixed_loading_seed;
  return spec;
}

struct MethodFit {
  double D_R = 0.0, D_C = 0.0, mse = 0.0;
  int khat1 = 0, khat2 = 0;
};

MethodFit fit_one(const RunConfig& c, Method method, const MatrixSeries& X,
                  const GroundTruth& truth, int kendall_threads) {
  LoadingEstimate loadings = method == Method::mrts
                                 ? mrts_loadings(X, c.k1, c.k2, kendall_threads)
                                 : apca_loadings(X, c.k1, c.k2);
  FactorFit fit = mrts_factors(X, loadings, true);

  MethodFit out;
  out.D_R = subspace_distance(loadings.R_hat, truth.R);
  out.D_C = subspace_distance(loadings.C_hat, truth.C);
  out.mse = mse_common(*fit.common, truth.S);
  auto [row_sel, col_sel] =
      method == Method::mrts
          ? mker_ranks_from_spectra(loadings.row_eigenvalues, loadings.col_eigenvalues, X.T,
                                    X.p1, X.p2, c.kmax, c.ridge_c, c.epsilon)
          : apca_ranks_from_spectra(loadings.row_eigenvalues, loadings.col_eigenvalues,
                                    c.kmax);
  out.khat1 = row_sel.k_hat;
  out.khat2 = col_sel.k_hat;
  return out;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

std::string mean_sd_cell(double mean, double sd) {
  return format_double(mean) + "(" + format_double(sd) + ")";
}

MatrixSeries copy_range(const MatrixSeries& series, Index begin, Index len) {
  MatrixSeries out(len, series.p1, series.p2);
  const std::size_t slice = static_cast<std::size_t>(series.p1 * series.p2);
  std::copy_n(series.data.begin() + static_cast<std::ptrdiff_t>(begin * slice), len * slice,
              out.data.begin());
  return out;
}

double median_seconds(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

template <class F>
double time_once(F&& body) {
  auto start = std::chrono::steady_clock::now();
  body();
  auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

void apply_scenario(RunConfig& config) {
  if (config.scenario == 'A') {
    config.phi = 0.0;
    config.psi = 0.0;
  } else if (config.scenario == 'B') {
    config.phi = 0.1;
    config.psi = 0.1;
  } else {
    throw ParamError("scenario must be A or B");
  }
}

std::uint64_t replication_seed(std::uint64_t master_seed, int rep) {
  return Rng::stream(master_seed, static_cast<std::uint64_t>(rep)).next_u64();
}

SimulateResult cmd_simulate(const RunConfig& config) {
  if (config.reps < 1) throw ParamError("simulate: --reps must be >= 1");
  if (config.methods.empty()) throw ParamError("simulate: --methods must name at least one");
  if (config.threads < 1) throw ParamError("simulate: --threads must be >= 1");
  ensure_out_dir(config);

  // Loading seed shared by all replications under --fixed-loadings.
  const std::uint64_t fixed_loading_seed =
      Rng::stream(config.seed, 0x10adu, 1).next_u64();

  const int reps = config.reps;
  std::vector<std::vector<MethodFit>> fits(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(reps));

  auto run_rep = [&](int rep) {
    try {
      ScenarioSpec spec = spec_for_rep(config, rep, fixed_loading_seed);
      auto [X, truth] = generate_scenario(spec);
      std::vector<MethodFit>& per_method = fits[static_cast<std::size_t>(rep)];
      per_method.reserve(config.methods.size());
      for (Method method : config.methods)
        per_method.push_back(fit_one(config, method, X, truth, 1));
    } catch (...) {
      failures[static_cast<std::size_t>(rep)] = std::current_exception();
    }
  };

  int workers = std::min(config.threads, reps);
  if (workers <= 1) {
    for (int rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          int rep = next.fetch_add(1, std::memory_order_relaxed);
          if (rep >= reps) return;
          run_rep(rep);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  for (int rep = 0; rep < reps; ++rep) {
    if (!failures[static_cast<std::size_t>(rep)]) continue;
    std::string prefix = "simulate: replication " + std::to_string(rep) + " (seed " +
                         std::to_string(replication_seed(config.seed, rep)) + ") failed: ";
    try {
      std::rethrow_exception(failures[static_cast<std::size_t>(rep)]);
    } catch (const Error& e) {
      throw Error(e.kind(), prefix + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::numeric, prefix + e.what());
    }
  }

  SimulateResult result;
  result.rows.reserve(static_cast<std::size_t>(reps) * config.methods.size());
  for (int rep = 0; rep < reps; ++rep) {
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const MethodFit& f = fits[static_cast<std::size_t>(rep)][m];
      SimRepRow row;
      row.rep = rep;
      row.method = config.methods[m];
      row.D_R = f.D_R;
      row.D_C = f.D_C;
      row.mse = f.mse;
      row.khat1 = f.khat1;
      row.khat2 = f.khat2;
      row.seed = replication_seed(config.seed, rep);
      result.rows.push_back(row);
    }
  }

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    std::vector<double> d_r, d_c, mse;
    int exact = 0, under = 0;
    for (int rep = 0; rep < reps; ++rep) {
      const MethodFit& f = fits[static_cast<std::size_t>(rep)][m];
      d_r.push_back(f.D_R);
      d_c.push_back(f.D_C);
      mse.push_back(f.mse);
      if (f.khat1 == config.k1 && f.khat2 == config.k2) ++exact;
      if (f.khat1 < config.k1 || f.khat2 < config.k2) ++under;
    }
    SimAggregate agg;
    agg.method = config.methods[m];
    agg.reps = reps;
    agg.mean_D_R = mean_of(d_r);
    agg.sd_D_R = sd_of(d_r, agg.mean_D_R);
    agg.mean_D_C = mean_of(d_c);
    agg.sd_D_C = sd_of(d_c, agg.mean_D_C);
    agg.mean_mse = mean_of(mse);
    agg.sd_mse = sd_of(mse, agg.mean_mse);
    agg.freq_exact = static_cast<double>(exact) / reps;
    agg.freq_under = static_cast<double>(under) / reps;
    result.aggregates.push_back(agg);
  }

  std::vector<std::string> echo = config_echo(config);
  add_delta_echo(echo, config, config.T, config.p1, config.p2);

  const std::string dist_name = to_string(config.dist, config.nu);
  std::vector<TableRow> rep_rows;
  rep_rows.reserve(result.rows.size());
  for (const SimRepRow& r : result.rows) {
    TableRow row;
    row.add("rep", static_cast<std::int64_t>(r.rep))
        .add("method", to_string(r.method))
        .add("dist", dist_name)
        .add("T", static_cast<std::int64_t>(config.T))
        .add("p1", static_cast<std::int64_t>(config.p1))
        .add("p2", static_cast<std::int64_t>(config.p2))
        .add("D_R", r.D_R)
        .add("D_C", r.D_C)
        .add("MSE", r.mse)
        .add("khat1", static_cast<std::int64_t>(r.khat1))
        .add("khat2", static_cast<std::int64_t>(r.khat2))
        .add("seed", std::to_string(r.seed));
    rep_rows.push_back(std::move(row));
  }
  result.per_rep_path = config.out_dir / "simulate_replications.csv";
  write_table(rep_rows, result.per_rep_path, echo);

  std::vector<TableRow> agg_rows;
  for (const SimAggregate& a : result.aggregates) {
    TableRow row;
    row.add("method", to_string(a.method))
        .add("dist", dist_name)
        .add("T", static_cast<std::int64_t>(config.T))
        .add("p1", static_cast<std::int64_t>(config.p1))
        .add("p2", static_cast<std::int64_t>(config.p2))
        .add("reps", static_cast<std::int64_t>(a.reps))
        .add("D_R", mean_sd_cell(a.mean_D_R, a.sd_D_R))
        .add("D_C", mean_sd_cell(a.mean_D_C, a.sd_D_C))
        .add("MSE", mean_sd_cell(a.mean_mse, a.sd_mse))
        .add("rank_recovery", mean_sd_cell(a.freq_exact, a.freq_under));
    agg_rows.push_back(std::move(row));
  }
  result.aggregate_path = config.out_dir / "simulate_aggregate.csv";
  write_table(agg_rows, result.aggregate_path, echo);
  return result;
}

namespace {

void save_matrix_long_csv(const Eigen::MatrixXd& M, const fs::path& path) {
  MatrixSeries wrap(1, M.rows(), M.cols());
  wrap.slice(0) = M;
  save_series(wrap, path, SeriesFormat::long_csv);
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') {
      out += '\\';
      out += ch;
    } else if (ch == '\n') {
      out += "\\n";
    } else {
      out += ch;
    }
  }
  return out;
}

std::string json_array(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out + "]";
}

}  // namespace

EstimateResult cmd_estimate(const RunConfig& config) {
  require_input(config);
  if (!config.auto_rank && (config.k1 < 1 || config.k2 < 1))
    throw ParamError("estimate: provide --k1 and --k2, or pass --auto-rank");
  ensure_out_dir(config);

  MatrixSeries X = load_series(config.input, config.in_format);

  int k1 = config.k1, k2 = config.k2;
  RankSelection row_sel, col_sel;
  if (config.auto_rank) {
    auto sel = config.roll_method == Method::apca
                   ? apca_ranks(X, config.kmax)
                   : mker_ranks(X, config.kmax, config.ridge_c, config.epsilon,
                                config.threads);
    row_sel = sel.first;
    col_sel = sel.second;
    k1 = row_sel.k_hat;
    k2 = col_sel.k_hat;
  }

  Method method = config.roll_method;
  LoadingEstimate loadings = method == Method::mrts
                                 ? mrts_loadings(X, k1, k2, config.threads)
                                 : apca_loadings(X, k1, k2);
  FactorFit fit = mrts_factors(X, loadings, true);

  EstimateResult result;
  result.khat1 = k1;
  result.khat2 = k2;

  result.loadings_R_path = config.out_dir / "loadings_R.csv";
  result.loadings_C_path = config.out_dir / "loadings_C.csv";
  save_matrix_long_csv(loadings.R_hat, result.loadings_R_path);
  save_matrix_long_csv(loadings.C_hat, result.loadings_C_path);

  MatrixSeries factors(X.T, k1, k2);
  for (Index t = 0; t < X.T; ++t) factors.slice(t) = fit.factors[static_cast<std::size_t>(t)];
  result.factors_path = config.out_dir / "factors.csv";
  save_series(factors, result.factors_path, SeriesFormat::long_csv);

  result.common_path = config.out_dir / "common.mkt";
  save_series(*fit.common, result.common_path, SeriesFormat::mkt_binary);

  auto [delta1, delta2] = rank_deltas(config, X.T, X.p1, X.p2);
  std::string json = "{\n";
  json += "  \"method\": \"" + to_string(method) + "\",\n";
  json += "  \"input\": \"" + json_escape(config.input.string()) + "\",\n";
  json += "  \"T\": " + std::to_string(X.T) + ",\n";
  json += "  \"p1\": " + std::to_string(X.p1) + ",\n";
  json += "  \"p2\": " + std::to_string(X.p2) + ",\n";
  json += "  \"auto_rank\": " + std::string(config.auto_rank ? "true" : "false") + ",\n";
  json += "  \"k1\": " + std::to_string(k1) + ",\n";
  json += "  \"k2\": " + std::to_string(k2) + ",\n";
  json += "  \"kmax\": " + std::to_string(config.kmax) + ",\n";
  json += "  \"ridge_c\": " + format_double(config.ridge_c) + ",\n";
  json += "  \"epsilon\": " + format_double(config.epsilon) + ",\n";
  json += "  \"delta1\": " + format_double(delta1) + ",\n";
  json += "  \"delta2\": " + format_double(delta2) + ",\n";
  json += "  \"row_spectrum\": " + json_array(loadings.row_eigenvalues) + ",\n";
  json += "  \"col_spectrum\": " + json_array(loadings.col_eigenvalues) + ",\n";
  json += "  \"warnings\": {\"degenerate_gap_row\": " +
          std::string(loadings.degenerate_gap_row ? "true" : "false") +
          ", \"degenerate_gap_col\": " +
          std::string(loadings.degenerate_gap_col ? "true" : "false") + "},\n";
  json += "  \"artifacts\": {\"loadings_R\": \"loadings_R.csv\", \"loadings_C\": "
          "\"loadings_C.csv\", \"factors\": \"factors.csv\", \"common\": \"common.mkt\"},\n";
  json += "  \"config_echo\": [";
  std::vector<std::string> echo = config_echo(config);
  for (std::size_t i = 0; i < echo.size(); ++i) {
    if (i) json += ", ";
    json += "\"" + json_escape(echo[i]) + "\"";
  }
  json += "]\n}\n";

  result.metadata_path = config.out_dir / "metadata.json";
  std::ofstream meta(result.metadata_path, std::ios::binary | std::ios::trunc);
  if (!meta) throw IoError("cannot open '" + result.metadata_path.string() + "' for writing");
  meta << json;
  meta.flush();
  if (!meta) throw IoError("write to '" + result.metadata_path.string() + "' failed");

  result.fit = std::move(fit);
  return result;
}

RankResult cmd_rank(const RunConfig& config) {
  require_input(config);
  if (config.selectors.empty()) throw ParamError("rank: --selectors must name at least one");
  for (const std::string& s : config.selectors)
    if (s != "mker" && s != "apca")
      throw ParamError("rank: unknown selector '" + s + "' (expected mker or apca)");
  ensure_out_dir(config);

  MatrixSeries X = load_series(config.input, config.in_format);

  RankResult result;
  for (const std::string& selector : config.selectors) {
    RankTrace trace;
    trace.selector = selector;
    if (selector == "mker") {
      auto sel = mker_ranks(X, config.kmax, config.ridge_c, config.epsilon, config.threads);
      trace.row = sel.first;
      trace.col = sel.second;
    } else {
      auto sel = apca_ranks(X, config.kmax);
      trace.row = sel.first;
      trace.col = sel.second;
    }
    result.traces.push_back(std::move(trace));
  }

  std::vector<std::string> echo = config_echo(config);
  add_delta_echo(echo, config, X.T, X.p1, X.p2);

  std::vector<TableRow> rows;
  for (const RankTrace& trace : result.traces) {
    for (int side = 0; side < 2; ++side) {
      const RankSelection& sel = side == 0 ? trace.row : trace.col;
      for (int j = 1; j <= sel.kmax; ++j) {
        TableRow row;
        row.add("selector", trace.selector)
            .add("side", side == 0 ? "row" : "column")
            .add("j", static_cast<std::int64_t>(j))
            .add("ratio", sel.ratios[static_cast<std::size_t>(j - 1)])
            .add("k_hat", static_cast<std::int64_t>(sel.k_hat))
            .add("kmax", static_cast<std::int64_t>(sel.kmax))
            .add("c", sel.c)
            .add("delta", sel.delta)
            .add("epsilon", sel.epsilon);
        rows.push_back(std::move(row));
      }
    }
  }
  result.report_path = config.out_dir / "rank_report.csv";
  write_table(rows, result.report_path, echo);
  return result;
}

RollingReport cmd_rolling(const RunConfig& config) {
  require_input(config);
  if (config.window < 2) throw ParamError("rolling: --window must be >= 2");
  if (config.block < 1) throw ParamError("rolling: --block must be >= 1");
  if (config.k1 < 1 || config.k2 < 1) throw ParamError("rolling: --k1/--k2 must be >= 1");
  ensure_out_dir(config);

  MatrixSeries X = load_series(config.input, config.in_format);
  if (config.window + config.block > X.T)
    throw ParamError("rolling: window " + std::to_string(config.window) + " + block " +
                     std::to_string(config.block) + " exceeds series length " +
                     std::to_string(X.T));

  RollingReport report;
  report.window_len = config.window;
  report.block_len = config.block;
  report.k1 = config.k1;
  report.k2 = config.k2;
  report.method = config.roll_method;

  const int n_windows =
      1 + (static_cast<int>(X.T) - config.window - config.block) / config.block;
  Eigen::MatrixXd prev_R, prev_C;
  for (int w = 0; w < n_windows; ++w) {
    const Index train_begin = static_cast<Index>(w) * config.block;
    MatrixSeries train = copy_range(X, train_begin, config.window);
    MatrixSeries test = copy_range(X, train_begin + config.window, config.block);

    LoadingEstimate loadings =
        config.roll_method == Method::mrts
            ? mrts_loadings(train, config.k1, config.k2, config.threads)
            : apca_loadings(train, config.k1, config.k2);
    MatrixSeries fitted = config.identity_fit_hook
                              ? test
                              : *mrts_factors(test, loadings, true).common;
    PricingErrors pe = pricing_errors(test, fitted);

    RollingWindowRow row;
    row.window = w + 1;
    row.mse = pe.mse;
    row.rho = pe.rho;
    if (w > 0)
      row.v = loading_variation(prev_R, prev_C, loadings.R_hat, loadings.C_hat);
    report.rows.push_back(row);
    prev_R = loadings.R_hat;
    prev_C = loadings.C_hat;
  }

  double mse_acc = 0.0, rho_acc = 0.0, v_acc = 0.0;
  int v_count = 0;
  for (const RollingWindowRow& row : report.rows) {
    mse_acc += row.mse;
    rho_acc += row.rho;
    if (row.v) {
      v_acc += *row.v;
      ++v_count;
    }
  }
  report.mean_mse = mse_acc / report.rows.size();
  report.mean_rho = rho_acc / report.rows.size();
  if (v_count > 0) report.mean_v = v_acc / v_count;

  std::vector<TableRow> rows;
  for (const RollingWindowRow& r : report.rows) {
    TableRow row;
    row.add("window", static_cast<std::int64_t>(r.window))
        .add("MSE", r.mse)
        .add("rho", r.rho)
        .add("v", r.v ? Cell(*r.v) : Cell(std::string{}));
    rows.push_back(std::move(row));
  }
  TableRow mean_row;
  mean_row.add("window", std::string("mean"))
      .add("MSE", report.mean_mse)
      .add("rho", report.mean_rho)
      .add("v", report.mean_v ? Cell(*report.mean_v) : Cell(std::string{}));
  rows.push_back(std::move(mean_row));

  write_table(rows, config.out_dir / "rolling_report.csv", config_echo(config));
  return report;
}

BenchResult cmd_bench(const RunConfig& config) {
  if (config.bench_T.empty() || config.bench_p.empty())
    throw ParamError("bench: T and p grids must be non-empty");
  if (config.bench_reps < 1) throw ParamError("bench: --bench-reps must be >= 1");
  ensure_out_dir(config);

  BenchResult result;
  for (Index p : config.bench_p) {
    for (Index T : config.bench_T) {
      ScenarioSpec spec;
      spec.T = T;
      spec.p1 = p;
      spec.p2 = p;
      spec.k1 = std::min<int>(3, static_cast<int>(p));
      spec.k2 = spec.k1;
      spec.dist = config.dist;
      spec.nu = config.nu;
      spec.phi = config.phi;
      spec.psi = config.psi;
      spec.seed = replication_seed(config.seed, static_cast<int>(T * 131 + p));
      auto [X, truth] = generate_scenario(spec);
      (void)truth;

      std::vector<double> kendall_times, fit_times;
      for (int r = 0; r < config.bench_reps; ++r) {
        kendall_times.push_back(time_once([&] {
          KendallTau row_tau = kendall(X, KendallSide::row, std::nullopt, config.threads);
          KendallTau col_tau = kendall(X, KendallSide::column, std::nullopt, config.threads);
          (void)row_tau;
          (void)col_tau;
        }));
        fit_times.push_back(time_once([&] {
          LoadingEstimate loadings = mrts_loadings(X, spec.k1, spec.k2, config.threads);
          FactorFit fit = mrts_factors(X, loadings, true);
          (void)fit;
        }));
      }
      BenchRow row;
      row.T = T;
      row.p = p;
      row.kendall_seconds = median_seconds(kendall_times);
      row.fit_seconds = median_seconds(fit_times);
      result.rows.push_back(row);
    }
  }

  // Log-log slope of time against T within each fixed-p group.
  auto slope_for = [&](Index p, auto time_of) {
    std::vector<double> xs, ys;
    for (const BenchRow& row : result.rows)
      if (row.p == p && time_of(row) > 0.0) {
        xs.push_back(std::log(static_cast<double>(row.T)));
        ys.push_back(std::log(time_of(row)));
      }
    if (xs.size() < 2) return 0.0;
    double mx = mean_of(xs), my = mean_of(ys), num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      num += (xs[i] - mx) * (ys[i] - my);
      den += (xs[i] - mx) * (xs[i] - mx);
    }
    return den > 0.0 ? num / den : 0.0;
  };
  for (BenchRow& row : result.rows) {
    row.kendall_slope_T = slope_for(row.p, [](const BenchRow& r) { return r.kendall_seconds; });
    row.fit_slope_T = slope_for(row.p, [](const BenchRow& r) { return r.fit_seconds; });
  }

  std::vector<TableRow> rows;
  for (const BenchRow& r : result.rows) {
    TableRow row;
    row.add("T", static_cast<std::int64_t>(r.T))
        .add("p1", static_cast<std::int64_t>(r.p))
        .add("p2", static_cast<std::int64_t>(r.p))
        .add("kendall_seconds", r.kendall_seconds)
        .add("fit_seconds", r.fit_seconds)
        .add("kendall_slope_T", r.kendall_slope_T)
        .add("fit_slope_T", r.fit_slope_T);
    rows.push_back(std::move(row));
  }
  result.report_path = config.out_dir / "bench_report.csv";
  write_table(rows, result.report_path, config_echo(config));
  return result;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::config: return 2;
      case ErrorKind::data: return 3;
      case ErrorKind::numeric: return 4;
    }
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e) ||
      dynamic_cast<const std::ios_base::failure*>(&e))
    return 3;
  return 4;
}

}  // namespace mktau
