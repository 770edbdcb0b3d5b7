#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mktau/tensor_io.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mktau_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& name) const { return path / name; }
};

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the installed binary (path injected through MKTAU_CLI) with the given
// arguments, capturing exit code and both streams.
CliRun run_cli(const TempDir& dir, const std::string& args) {
  const char* cli = std::getenv("MKTAU_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "MKTAU_CLI must point at the command line binary");
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + cli + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun run;
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  run.out = oracle::read_file(out.string());
  run.err = oracle::read_file(err.string());
  return run;
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary);
  f << body;
}

fs::path write_factor_input(const TempDir& dir, mktau::Index T, mktau::Index p1,
                            mktau::Index p2, std::uint64_t seed) {
  mktau::MatrixSeries X = oracle::factor_series(T, p1, p2, 1, 0.1, seed);
  const fs::path input = dir / "input.csv";
  mktau::save_series(X, input, mktau::SeriesFormat::long_csv);
  return input;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("version and help exit cleanly") {
  TempDir dir;
  CliRun version = run_cli(dir, "--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("mktau") != std::string::npos);
  CHECK(run_cli(dir, "--help").code == 0);
  CHECK(run_cli(dir, "simulate --help").code == 0);
}

TEST_CASE("usage errors exit with the configuration code") {
  TempDir dir;
  CHECK(run_cli(dir, "").code == 2);                       // subcommand required
  CHECK(run_cli(dir, "simulate --no-such-flag").code == 2);
  CHECK(run_cli(dir, "estimate --k1 1 --k2 1").code == 2); // --input required
  CHECK(run_cli(dir, "simulate --reps 0").code == 2);
  CHECK(run_cli(dir, "simulate --scenario Q").code == 2);
  CHECK(run_cli(dir, "simulate --dist t0").code == 2);
}

TEST_CASE("small simulation runs are byte reproducible") {
  TempDir dir1, dir2;
  const std::string base =
      "simulate --T 8 --p1 5 --p2 4 --k1 1 --k2 1 --reps 2 --kmax 2 --seed 7 --out ";
  CliRun first = run_cli(dir1, base + "\"" + dir1.path.string() + "\"");
  REQUIRE(first.code == 0);
  CliRun second = run_cli(dir2, base + "\"" + dir2.path.string() + "\"");
  REQUIRE(second.code == 0);
  const std::string rep1 = oracle::read_file((dir1 / "simulate_replications.csv").string());
  const std::string rep2 = oracle::read_file((dir2 / "simulate_replications.csv").string());
  CHECK(rep1 == rep2);
  CHECK(rep1.find("rep,method,dist") != std::string::npos);
  CHECK(oracle::read_file((dir1 / "simulate_aggregate.csv").string()) ==
        oracle::read_file((dir2 / "simulate_aggregate.csv").string()));
}

TEST_CASE("missing input file maps to the data exit code") {
  TempDir dir;
  CliRun run = run_cli(dir, "estimate --input \"" + (dir / "nope.csv").string() +
                                "\" --k1 1 --k2 1 --out \"" + (dir / "out").string() + "\"");
  CHECK(run.code == 3);
  CHECK(run.err.find("error:") != std::string::npos);
  // No artifacts may be left behind by the failed run.
  CHECK_FALSE(fs::exists(dir / "out" / "metadata.json"));
}

TEST_CASE("malformed input maps to the data exit code") {
  TempDir dir;
  write_text(dir / "bad.csv", "t,row,col,value\n0,0,0,abc\n");
  CliRun run = run_cli(dir, "rank --input \"" + (dir / "bad.csv").string() +
                                "\" --kmax 2 --out \"" + (dir / "out").string() + "\"");
  CHECK(run.code == 3);
  CHECK(run.err.find("value") != std::string::npos);
}

TEST_CASE("degenerate data maps to the numeric exit code") {
  TempDir dir;
  mktau::MatrixSeries constant(5, 4, 3);
  for (double& v : constant.data) v = 7.0;
  const fs::path input = dir / "constant.csv";
  mktau::save_series(constant, input, mktau::SeriesFormat::long_csv);
  CliRun run = run_cli(dir, "rank --input \"" + input.string() + "\" --kmax 2 --out \"" +
                                (dir / "out").string() + "\"");
  CHECK(run.code == 4);
}

TEST_CASE("config file fills defaults and flags override it") {
  TempDir dir1, dir2;
  const fs::path cfg = dir1 / "run.cfg";
  write_text(cfg, "[simulate]\nT=9\np1=5\np2=4\nk1=1\nk2=1\nreps=2\nkmax=2\nseed=3\n");

  CliRun from_file = run_cli(dir1, "--config \"" + cfg.string() + "\" simulate --out \"" +
                                       dir1.path.string() + "\"");
  REQUIRE(from_file.code == 0);
  std::string echo = oracle::read_file((dir1 / "simulate_replications.csv").string());
  CHECK(echo.find("# T=9\n") != std::string::npos);

  CliRun overridden = run_cli(dir2, "--config \"" + cfg.string() + "\" simulate --T 7 --out \"" +
                                        dir2.path.string() + "\"");
  REQUIRE(overridden.code == 0);
  echo = oracle::read_file((dir2 / "simulate_replications.csv").string());
  CHECK(echo.find("# T=7\n") != std::string::npos);
  CHECK(echo.find("# seed=3\n") != std::string::npos);

  CHECK(run_cli(dir1, "--config \"" + (dir1 / "absent.cfg").string() + "\" simulate").code ==
        2);
}

TEST_CASE("rank report echoes the selector defaults") {
  TempDir dir;
  const fs::path input = write_factor_input(dir, 10, 10, 9, 90);
  CliRun run = run_cli(dir, "rank --input \"" + input.string() + "\" --out \"" +
                                (dir / "out").string() + "\"");
  REQUIRE(run.code == 0);
  const std::string report = oracle::read_file((dir / "out" / "rank_report.csv").string());
  CHECK(report.find("# kmax=8\n") != std::string::npos);
  CHECK(report.find("# selectors=mker,apca\n") != std::string::npos);
  CHECK(report.find("# epsilon=0.05") != std::string::npos);
}

TEST_CASE("estimate writes its artifact set") {
  TempDir dir;
  const fs::path input = write_factor_input(dir, 12, 6, 5, 91);
  CliRun run = run_cli(dir, "estimate --input \"" + input.string() +
                                "\" --k1 1 --k2 1 --out \"" + (dir / "out").string() + "\"");
  REQUIRE(run.code == 0);
  for (const char* name :
       {"loadings_R.csv", "loadings_C.csv", "factors.csv", "common.mkt", "metadata.json"})
    CHECK(fs::exists(dir / "out" / name));
  CHECK(run.out.find("metadata.json") != std::string::npos);
}

TEST_CASE("rolling command emits the per window report") {
  TempDir dir;
  const fs::path input = write_factor_input(dir, 20, 5, 4, 92);
  CliRun run = run_cli(dir, "rolling --input \"" + input.string() +
                                "\" --window 8 --block 4 --k1 1 --k2 1 --out \"" +
                                (dir / "out").string() + "\"");
  REQUIRE(run.code == 0);
  auto rows = oracle::csv_rows((dir / "out" / "rolling_report.csv").string());
  // 1 + (20 - 8 - 4) / 4 = 3 windows + header + mean row.
  REQUIRE(rows.size() == 5);
  CHECK(rows[4][0] == "mean");
}

TEST_SUITE_END();
