#include "ksid/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ksid/errors.hpp"

namespace ksid {

namespace {

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

// Full-precision round-trip formatting for CSV output.
std::string full(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

void pad(std::ostringstream& out, const std::string& text, std::size_t width) {
  out << text;
  for (std::size_t i = text.size(); i < width; ++i) out << ' ';
}

constexpr const char* kMetricHeader =
    "NRMSE      NRMSE(y)   R^2        MAPE%      N";

void metric_cells(std::ostringstream& out, const MetricReport& r) {
  pad(out, fixed(r.nrmse, 4), 11);
  pad(out, fixed(r.nrmse_measured_mean, 4), 11);
  pad(out, fixed(r.r_squared, 4), 11);
  pad(out, fixed(r.mape, 2), 11);
  out << r.n_points;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open report file: " + path.string());
  return out;
}

constexpr const char* kMetricCsvColumns =
    "nrmse,nrmse_measured_mean,r_squared,mape,n_points";

void metric_csv_cells(std::ofstream& out, const MetricReport& r) {
  out << full(r.nrmse) << ',' << full(r.nrmse_measured_mean) << ','
      << full(r.r_squared) << ',' << full(r.mape) << ',' << r.n_points;
}

}  // namespace

std::string format_metric_table(const std::string& title,
                                std::span<const MetricReport> reports) {
  std::ostringstream out;
  out << title << '\n';
  pad(out, "Channel", 16);
  out << kMetricHeader << '\n';
  for (const auto& r : reports) {
    pad(out, r.channel, 16);
    metric_cells(out, r);
    out << '\n';
  }
  return out.str();
}

void write_metric_csv(const std::filesystem::path& path,
                      std::span<const MetricReport> reports) {
  auto out = open_out(path);
  out << "channel," << kMetricCsvColumns << '\n';
  for (const auto& r : reports) {
    out << r.channel << ',';
    metric_csv_cells(out, r);
    out << '\n';
  }
}

namespace {

// Cycles and channels keep their first-appearance order; the rows of one
// (cycle, channel) group stay in input order.
std::vector<const ComparisonRow*> group_rows(
    std::span<const ComparisonRow> rows) {
  std::vector<std::string> cycles;
  std::vector<std::string> channels;
  for (const auto& row : rows) {
    if (std::find(cycles.begin(), cycles.end(), row.cycle) == cycles.end()) {
      cycles.push_back(row.cycle);
    }
    if (std::find(channels.begin(), channels.end(), row.channel) ==
        channels.end()) {
      channels.push_back(row.channel);
    }
  }
  std::vector<const ComparisonRow*> ordered;
  ordered.reserve(rows.size());
  for (const auto& cycle : cycles) {
    for (const auto& channel : channels) {
      for (const auto& row : rows) {
        if (row.cycle == cycle && row.channel == channel) {
          ordered.push_back(&row);
        }
      }
    }
  }
  return ordered;
}

}  // namespace

std::string format_comparison_table(std::span<const ComparisonRow> rows) {
  std::ostringstream out;
  std::string cycle;
  std::string channel;
  bool first_cycle = true;
  for (const ComparisonRow* row : group_rows(rows)) {
    if (row->cycle != cycle) {
      cycle = row->cycle;
      channel.clear();
      if (!first_cycle) out << '\n';
      first_cycle = false;
      out << "Model accuracy, " << cycle << " test cycle\n";
    }
    if (row->channel != channel) {
      channel = row->channel;
      out << "--- " << channel << " ---\n";
      pad(out, "Method", 22);
      out << kMetricHeader << '\n';
    }
    pad(out, row->method, 22);
    metric_cells(out, row->metrics);
    out << '\n';
  }
  return out.str();
}

void write_comparison_csv(const std::filesystem::path& path,
                          std::span<const ComparisonRow> rows) {
  auto out = open_out(path);
  out << "cycle,channel,method," << kMetricCsvColumns << '\n';
  for (const ComparisonRow* row : group_rows(rows)) {
    out << row->cycle << ',' << row->channel << ',' << row->method << ',';
    metric_csv_cells(out, row->metrics);
    out << '\n';
  }
}

std::string format_sweep_table(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "Dictionary-size sweep\n";
  pad(out, "N_RBF", 8);
  pad(out, "Cycle", 12);
  pad(out, "Channel", 16);
  out << kMetricHeader << "          train residual\n";
  for (const auto& row : rows) {
    pad(out, std::to_string(row.rbf_count), 8);
    pad(out, row.cycle, 12);
    pad(out, row.channel, 16);
    metric_cells(out, row.metrics);
    out << "       " << full(row.train_state_residual) << '\n';
  }
  return out.str();
}

void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepRow> rows) {
  auto out = open_out(path);
  out << "rbf_count,cycle,channel," << kMetricCsvColumns
      << ",train_state_residual\n";
  for (const auto& row : rows) {
    out << row.rbf_count << ',' << row.cycle << ',' << row.channel << ',';
    metric_csv_cells(out, row.metrics);
    out << ',' << full(row.train_state_residual) << '\n';
  }
}

}  // namespace ksid
