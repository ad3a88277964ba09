#include "ksid/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ksid/errors.hpp"

namespace ksid {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no,
                  const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw DataError("line " + std::to_string(line_no) + ", column '" + column +
                    "': cannot parse value '" + cell + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ", column '" + column +
                    "': non-finite value '" + cell + "'");
  }
  return value;
}

// Shortest representation that parses back to the same double.
std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

TimeSeriesDataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open csv file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("csv file is empty: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  if (header.empty() || header[0] != "time_s") {
    throw DataError("csv header must start with a 'time_s' column: " +
                    path.string());
  }
  TimeSeriesDataset ds;
  ds.name = path.stem().string();
  for (std::size_t i = 1; i < header.size(); ++i) {
    Channel ch;
    const std::string& cell = header[i];
    const auto bracket = cell.find('[');
    if (bracket != std::string::npos && cell.back() == ']') {
      ch.name = cell.substr(0, bracket);
      ch.unit = cell.substr(bracket + 1, cell.size() - bracket - 2);
    } else {
      ch.name = cell;
    }
    if (ch.name.empty()) {
      throw DataError("empty channel name in csv header: " + path.string());
    }
    for (const auto& existing : ds.channels) {
      if (existing.name == ch.name) {
        throw DataError("duplicate channel '" + ch.name +
                        "' in csv header: " + path.string());
      }
    }
    ds.channels.push_back(std::move(ch));
  }
  if (ds.channels.empty()) {
    throw DataError("csv file has no data channels: " + path.string());
  }

  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    times.push_back(parse_cell(cells[0], line_no, "time_s"));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      ds.channels[i - 1].data.push_back(
          parse_cell(cells[i], line_no, ds.channels[i - 1].name));
    }
  }
  if (times.size() < 2) {
    throw DataError("csv file needs at least 2 data rows: " + path.string());
  }

  const double dt =
      (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) {
    throw DataError("time_s must be strictly increasing: " + path.string());
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (step <= 0.0) {
      throw DataError("time_s is not strictly increasing at data row " +
                      std::to_string(i + 1));
    }
    if (std::abs(step - dt) > 1e-6) {
      throw DataError("non-uniform sampling at data row " +
                      std::to_string(i + 1) + ": step " + format_double(step) +
                      " vs mean " + format_double(dt));
    }
  }
  ds.sample_rate = 1.0 / dt;
  ds.validate();
  return ds;
}

void export_csv(const TimeSeriesDataset& dataset,
                const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open csv file for writing: " + path.string());

  out << "time_s";
  for (const auto& ch : dataset.channels) {
    out << ',' << ch.name;
    if (!ch.unit.empty()) out << '[' << ch.unit << ']';
  }
  out << '\n';

  const std::size_t len = dataset.length();
  for (std::size_t i = 0; i < len; ++i) {
    out << format_double(static_cast<double>(i) / dataset.sample_rate);
    for (const auto& ch : dataset.channels) {
      out << ',' << format_double(ch.data[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing csv file: " + path.string());
}

}  // namespace ksid
