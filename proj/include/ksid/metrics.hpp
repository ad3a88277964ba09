// Time-series accuracy metrics: NRMSE, R^2 and MAPE, plus the per-channel
// aggregation used by the evaluation reports.
//
// Convention note: nrmse() divides the RMS error by the mean of the
// *predicted* signal. That is unusual (most references divide by the mean of
// the measured signal) but is the convention this toolkit standardizes on;
// nrmse_measured_mean() provides the common alternative and both appear in
// reports. The error sign convention is e = predicted - measured.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ksid/matrix.hpp"

namespace ksid {

struct MetricReport {
  std::string channel;
  double nrmse = 0.0;                // RMS(e) / mean(predicted)
  double nrmse_measured_mean = 0.0;  // RMS(e) / mean(measured)
  double r_squared = 0.0;            // 1 - SSE / SST, may be negative
  double mape = 0.0;                 // percent
  std::size_t n_points = 0;
};

double nrmse(std::span<const double> measured, std::span<const double> predicted);
double nrmse_measured_mean(std::span<const double> measured,
                           std::span<const double> predicted);
double r_squared(std::span<const double> measured,
                 std::span<const double> predicted);
// Throws DataError listing the offending indices if any measured value is 0.
double mape(std::span<const double> measured, std::span<const double> predicted);

// One report per row; `names` labels the rows.
std::vector<MetricReport> evaluate_channels(
    const Matrix& measured, const Matrix& predicted,
    std::span<const std::string> names);

}  // namespace ksid
