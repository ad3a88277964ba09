// Plain-text and CSV emission of metric tables: per-channel reports, the
// method-comparison table and the dictionary-size sweep table.
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ksid/metrics.hpp"

namespace ksid {

std::string format_metric_table(const std::string& title,
                                std::span<const MetricReport> reports);
void write_metric_csv(const std::filesystem::path& path,
                      std::span<const MetricReport> reports);

struct ComparisonRow {
  std::string cycle;    // e.g. "transient", "steady"
  std::string channel;  // output channel name
  std::string method;   // e.g. "EDMD (N_RBF=100)", "NARX"
  MetricReport metrics;
};

// Grouped by cycle, then channel, methods as rows.
std::string format_comparison_table(std::span<const ComparisonRow> rows);
void write_comparison_csv(const std::filesystem::path& path,
                          std::span<const ComparisonRow> rows);

struct SweepRow {
  std::size_t rbf_count = 0;
  std::string cycle;
  std::string channel;
  MetricReport metrics;
  double train_state_residual = 0.0;
};

std::string format_sweep_table(std::span<const SweepRow> rows);
void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const SweepRow> rows);

}  // namespace ksid
