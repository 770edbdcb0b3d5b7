#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mktau/matrix_series.hpp"

namespace mktau {

/// External series formats.
///
/// long_csv: header "t,row,col,value", zero-based indices, one cell per line,
/// rows in any order but covering every (t,row,col) exactly once. Doubles are
/// written with 17 significant digits so reloading reproduces them exactly.
///
/// mkt_binary: magic bytes "MKT1", then T, p1, p2 as little-endian unsigned
/// 32-bit integers, then the values as little-endian IEEE-754 doubles in
/// (t, row-major) order. File length is exactly 16 + 8*T*p1*p2 bytes.
enum class SeriesFormat { long_csv, mkt_binary };

MatrixSeries load_series(const std::filesystem::path& path, SeriesFormat format);
void save_series(const MatrixSeries& series, const std::filesystem::path& path,
                 SeriesFormat format);

/// One typed CSV cell: text, double (17 significant digits), or integer.
using Cell = std::variant<std::string, double, std::int64_t>;

/// Ordered named cells forming one report row.
struct TableRow {
  std::vector<std::pair<std::string, Cell>> cells;

  TableRow& add(std::string name, Cell value) {
    cells.emplace_back(std::move(name), std::move(value));
    return *this;
  }
};

/// Writes rows as RFC-4180-style CSV with a header row taken from the first
/// record. All records must share that ordered column set; an empty row list
/// is rejected (an empty report is a harness bug, not a result). Lines use
/// "\n" endings and "." decimals regardless of locale. Optional preamble
/// lines are emitted first, each prefixed with "# ".
void write_table(const std::vector<TableRow>& rows, const std::filesystem::path& path,
                 const std::vector<std::string>& preamble = {});

/// Renders a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace mktau
