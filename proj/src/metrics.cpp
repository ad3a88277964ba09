#include "ksid/metrics.hpp"

#include <cmath>
#include <string>

#include "ksid/errors.hpp"

namespace ksid {

namespace {

void check_pair(std::span<const double> measured,
                std::span<const double> predicted, std::size_t min_len) {
  if (measured.size() != predicted.size()) {
    throw ShapeError("metric input lengths differ: " +
                     std::to_string(measured.size()) + " vs " +
                     std::to_string(predicted.size()));
  }
  if (measured.size() < min_len) {
    throw DataError("metric needs at least " + std::to_string(min_len) +
                    " points");
  }
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double rms_error(std::span<const double> measured,
                 std::span<const double> predicted) {
  double sq = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double e = predicted[i] - measured[i];
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(measured.size()));
}

}  // namespace

double nrmse(std::span<const double> measured,
             std::span<const double> predicted) {
  check_pair(measured, predicted, 1);
  const double denom = mean_of(predicted);
  if (denom == 0.0) {
    throw DataError("nrmse: mean of the predicted signal is zero");
  }
  return rms_error(measured, predicted) / denom;
}

double nrmse_measured_mean(std::span<const double> measured,
                           std::span<const double> predicted) {
  check_pair(measured, predicted, 1);
  const double denom = mean_of(measured);
  if (denom == 0.0) {
    throw DataError("nrmse: mean of the measured signal is zero");
  }
  return rms_error(measured, predicted) / denom;
}

double r_squared(std::span<const double> measured,
                 std::span<const double> predicted) {
  check_pair(measured, predicted, 2);
  const double mean = mean_of(measured);
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double e = predicted[i] - measured[i];
    const double d = measured[i] - mean;
    sse += e * e;
    sst += d * d;
  }
  if (sst == 0.0) {
    throw DataError("r_squared: measured signal is constant");
  }
  return 1.0 - sse / sst;
}

double mape(std::span<const double> measured,
            std::span<const double> predicted) {
  check_pair(measured, predicted, 1);
  std::string zero_indices;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (measured[i] == 0.0) {
      if (!zero_indices.empty()) zero_indices += ", ";
      zero_indices += std::to_string(i);
    }
  }
  if (!zero_indices.empty()) {
    throw DataError("mape: measured signal is zero at indices [" +
                    zero_indices + "]");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    sum += std::abs(predicted[i] - measured[i]) / std::abs(measured[i]);
  }
  return sum / static_cast<double>(measured.size()) * 100.0;
}

std::vector<MetricReport> evaluate_channels(
    const Matrix& measured, const Matrix& predicted,
    std::span<const std::string> names) {
  if (measured.rows() != predicted.rows() ||
      measured.cols() != predicted.cols()) {
    throw ShapeError("evaluate_channels: matrix shapes differ");
  }
  if (names.size() != measured.rows()) {
    throw ShapeError("evaluate_channels: one name per row required");
  }
  std::vector<MetricReport> reports;
  reports.reserve(names.size());
  for (std::size_t i = 0; i < measured.rows(); ++i) {
    MetricReport r;
    r.channel = names[i];
    const auto y = measured.row(i);
    const auto yhat = predicted.row(i);
    r.nrmse = nrmse(y, yhat);
    r.nrmse_measured_mean = nrmse_measured_mean(y, yhat);
    r.r_squared = r_squared(y, yhat);
    r.mape = mape(y, yhat);
    r.n_points = y.size();
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace ksid
