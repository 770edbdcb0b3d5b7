#include "mktau/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace mktau {
namespace {

constexpr char kMagic[4] = {'M', 'K', 'T', '1'};
constexpr const char* kLongCsvHeader = "t,row,col,value";

static_assert(std::endian::native == std::endian::little,
              "mkt-binary I/O assumes a little-endian host");

std::string cell_name(std::int64_t t, std::int64_t r, std::int64_t c) {
  return "(t=" + std::to_string(t) + ",row=" + std::to_string(r) +
         ",col=" + std::to_string(c) + ")";
}

// Strict integer field: digits only, no sign, no whitespace.
std::int64_t parse_index(std::string_view field, const char* what, std::size_t line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0)
    throw FormatError("long-csv line " + std::to_string(line_no) + ": bad " + what +
                      " field '" + std::string(field) + "'");
  return value;
}

double parse_value(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("long-csv line " + std::to_string(line_no) + ": bad value field '" +
                      std::string(field) + "'");
  return value;
}

MatrixSeries load_long_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));

  std::string line;
  if (!std::getline(in, line))
    throw FormatError("long-csv '" + path.string() + "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLongCsvHeader)
    throw FormatError("long-csv '" + path.string() + "': expected header '" +
                      std::string(kLongCsvHeader) + "', got '" + line + "'");

  struct Entry {
    std::int64_t t, r, c;
    double v;
  };
  std::vector<Entry> entries;
  std::int64_t max_t = -1, max_r = -1, max_c = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      std::size_t comma = rest.find(',');
      if (f < 3) {
        if (comma == std::string_view::npos)
          throw FormatError("long-csv line " + std::to_string(line_no) +
                            ": expected 4 comma-separated fields");
        fields[f] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos)
          throw FormatError("long-csv line " + std::to_string(line_no) +
                            ": expected 4 comma-separated fields");
        fields[f] = rest;
      }
    }
    Entry e{parse_index(fields[0], "t", line_no), parse_index(fields[1], "row", line_no),
            parse_index(fields[2], "col", line_no), parse_value(fields[3], line_no)};
    max_t = std::max(max_t, e.t);
    max_r = std::max(max_r, e.r);
    max_c = std::max(max_c, e.c);
    entries.push_back(e);
  }
  if (entries.empty())
    throw FormatError("long-csv '" + path.string() + "': no data rows");

  MatrixSeries series(max_t + 1, max_r + 1, max_c + 1);
  std::vector<bool> seen(series.data.size(), false);
  for (const Entry& e : entries) {
    std::size_t idx = static_cast<std::size_t>((e.t * series.p1 + e.r) * series.p2 + e.c);
    if (seen[idx])
      throw FormatError("long-csv '" + path.string() + "': duplicate cell " +
                        cell_name(e.t, e.r, e.c));
    seen[idx] = true;
    series.data[idx] = e.v;
  }
  for (std::size_t idx = 0; idx < seen.size(); ++idx) {
    if (!seen[idx]) {
      std::int64_t t = static_cast<std::int64_t>(idx) / (series.p1 * series.p2);
      std::int64_t rem = static_cast<std::int64_t>(idx) % (series.p1 * series.p2);
      throw FormatError("long-csv '" + path.string() + "': missing cell " +
                        cell_name(t, rem / series.p2, rem % series.p2));
    }
  }
  for (std::size_t idx = 0; idx < series.data.size(); ++idx) {
    if (!std::isfinite(series.data[idx])) {
      std::int64_t t = static_cast<std::int64_t>(idx) / (series.p1 * series.p2);
      std::int64_t rem = static_cast<std::int64_t>(idx) % (series.p1 * series.p2);
      throw ValidationError("long-csv '" + path.string() + "': non-finite value at " +
                            cell_name(t, rem / series.p2, rem % series.p2));
    }
  }
  return series;
}

MatrixSeries load_mkt_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("mkt-binary '" + path.string() + "': magic bytes mismatch");

  std::uint32_t dims[3];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof dims))
    throw FormatError("mkt-binary '" + path.string() + "': truncated header");
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
    throw FormatError("mkt-binary '" + path.string() + "': zero dimension in header");

  std::uint64_t count = std::uint64_t(dims[0]) * dims[1] * dims[2];
  std::uint64_t expected = 16 + 8 * count;
  std::uintmax_t actual = std::filesystem::file_size(path);
  if (actual != expected)
    throw FormatError("mkt-binary '" + path.string() + "': file length " +
                      std::to_string(actual) + " does not match header (expected " +
                      std::to_string(expected) + ")");

  MatrixSeries series(dims[0], dims[1], dims[2]);
  if (!in.read(reinterpret_cast<char*>(series.data.data()),
               static_cast<std::streamsize>(8 * count)))
    throw FormatError("mkt-binary '" + path.string() + "': truncated payload");
  for (std::size_t idx = 0; idx < series.data.size(); ++idx) {
    if (!std::isfinite(series.data[idx])) {
      std::int64_t t = static_cast<std::int64_t>(idx) / (series.p1 * series.p2);
      std::int64_t rem = static_cast<std::int64_t>(idx) % (series.p1 * series.p2);
      throw ValidationError("mkt-binary '" + path.string() + "': non-finite value at " +
                            cell_name(t, rem / series.p2, rem % series.p2));
    }
  }
  return series;
}

void save_long_csv(const MatrixSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  out << kLongCsvHeader << '\n';
  for (Index t = 0; t < series.T; ++t)
    for (Index r = 0; r < series.p1; ++r)
      for (Index c = 0; c < series.p2; ++c)
        out << t << ',' << r << ',' << c << ',' << format_double(series.at(t, r, c)) << '\n';
  out.flush();
  if (!out)
    throw IoError("write to '" + path.string() + "' failed: " + std::strerror(errno));
}

void save_mkt_binary(const MatrixSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  out.write(kMagic, 4);
  std::uint32_t dims[3] = {static_cast<std::uint32_t>(series.T),
                           static_cast<std::uint32_t>(series.p1),
                           static_cast<std::uint32_t>(series.p2)};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(series.data.data()),
            static_cast<std::streamsize>(8 * series.data.size()));
  out.flush();
  if (!out)
    throw IoError("write to '" + path.string() + "' failed: " + std::strerror(errno));
}

// RFC 4180: quote when the field contains a comma, a quote, or a newline.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

std::string render_cell(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return csv_escape(*s);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::to_string(std::get<std::int64_t>(cell));
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MatrixSeries load_series(const std::filesystem::path& path, SeriesFormat format) {
  return format == SeriesFormat::long_csv ? load_long_csv(path) : load_mkt_binary(path);
}

void save_series(const MatrixSeries& series, const std::filesystem::path& path,
                 SeriesFormat format) {
  if (series.T < 1 || series.p1 < 1 || series.p2 < 1)
    throw ParamError("save_series: series dimensions must be at least 1");
  if (format == SeriesFormat::long_csv)
    save_long_csv(series, path);
  else
    save_mkt_binary(series, path);
}

void write_table(const std::vector<TableRow>& rows, const std::filesystem::path& path,
                 const std::vector<std::string>& preamble) {
  if (rows.empty())
    throw ValidationError("write_table: empty row list for '" + path.string() + "'");
  const TableRow& first = rows.front();
  if (first.cells.empty())
    throw ValidationError("write_table: rows must have at least one column");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const TableRow& row = rows[i];
    bool same = row.cells.size() == first.cells.size();
    for (std::size_t j = 0; same && j < row.cells.size(); ++j)
      same = row.cells[j].first == first.cells[j].first;
    if (!same)
      throw ValidationError("write_table: record " + std::to_string(i) +
                            " does not share the column set of record 0");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  for (const std::string& line : preamble) out << "# " << line << '\n';
  for (std::size_t j = 0; j < first.cells.size(); ++j) {
    if (j) out << ',';
    out << csv_escape(first.cells[j].first);
  }
  out << '\n';
  for (const TableRow& row : rows) {
    for (std::size_t j = 0; j < row.cells.size(); ++j) {
      if (j) out << ',';
      out << render_cell(row.cells[j].second);
    }
    out << '\n';
  }
  out.flush();
  if (!out)
    throw IoError("write to '" + path.string() + "' failed: " + std::strerror(errno));
}

}  // namespace mktau
