#include "ksid/dataset.hpp"

#include <cmath>
#include <string>

#include "ksid/errors.hpp"

namespace ksid {

const Channel* TimeSeriesDataset::find(std::string_view channel_name) const {
  for (const auto& ch : channels) {
    if (ch.name == channel_name) return &ch;
  }
  return nullptr;
}

const Channel& TimeSeriesDataset::require(std::string_view channel_name) const {
  const Channel* ch = find(channel_name);
  if (ch == nullptr) {
    throw DataError("dataset '" + name + "' has no channel '" +
                    std::string(channel_name) + "'");
  }
  return *ch;
}

void TimeSeriesDataset::validate() const {
  if (!(sample_rate > 0.0)) {
    throw DataError("dataset '" + name + "' has non-positive sample rate");
  }
  if (channels.empty()) {
    throw DataError("dataset '" + name + "' has no channels");
  }
  const std::size_t len = channels.front().data.size();
  if (len < 2) {
    throw DataError("dataset '" + name + "' needs at least 2 samples");
  }
  for (const auto& ch : channels) {
    if (ch.data.size() != len) {
      throw DataError("dataset '" + name + "' channel '" + ch.name +
                      "' length differs from the others");
    }
    for (double v : ch.data) {
      if (!std::isfinite(v)) {
        throw DataError("dataset '" + name + "' channel '" + ch.name +
                        "' contains a non-finite sample");
      }
    }
  }
}

namespace {

struct MeanStd {
  double mean;
  double std;
};

// Sample statistics (N-1 denominator) over the concatenated channel data.
MeanStd channel_stats(std::span<const TimeSeriesDataset> datasets,
                      const std::string& channel_name) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ds : datasets) {
    for (double v : ds.require(channel_name).data) {
      sum += v;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const auto& ds : datasets) {
    for (double v : ds.require(channel_name).data) {
      const double d = v - mean;
      sq += d * d;
    }
  }
  const double var = sq / static_cast<double>(count - 1);
  return {mean, std::sqrt(var)};
}

}  // namespace

namespace {

SnapshotMatrices fill_snapshots(std::span<const TimeSeriesDataset> datasets,
                                std::span<const std::string> state_names,
                                std::span<const std::string> input_names,
                                const NormalizationStats& stats) {
  const std::size_t n = state_names.size();
  const std::size_t m = input_names.size();

  std::size_t total_pairs = 0;
  for (const auto& ds : datasets) total_pairs += ds.length() - 1;

  SnapshotMatrices out;
  out.stats = stats;
  out.x = Matrix(n, total_pairs);
  out.y = Matrix(n, total_pairs);
  out.u = Matrix(m, total_pairs);

  std::size_t col = 0;
  for (const auto& ds : datasets) {
    const std::size_t pairs = ds.length() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& data = ds.require(state_names[i]).data;
      const double mean = stats.state_mean[i];
      const double inv_std = 1.0 / stats.state_std[i];
      for (std::size_t l = 0; l < pairs; ++l) {
        out.x(i, col + l) = (data[l] - mean) * inv_std;
        out.y(i, col + l) = (data[l + 1] - mean) * inv_std;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const auto& data = ds.require(input_names[i]).data;
      if (stats.normalizes_inputs()) {
        const double mean = stats.input_mean[i];
        const double inv_std = 1.0 / stats.input_std[i];
        for (std::size_t l = 0; l < pairs; ++l) {
          out.u(i, col + l) = (data[l] - mean) * inv_std;
        }
      } else {
        for (std::size_t l = 0; l < pairs; ++l) out.u(i, col + l) = data[l];
      }
    }
    col += pairs;
  }
  return out;
}

}  // namespace

SnapshotMatrices build_snapshots(std::span<const TimeSeriesDataset> datasets,
                                 std::span<const std::string> state_names,
                                 std::span<const std::string> input_names,
                                 const SnapshotOptions& options) {
  if (datasets.empty()) throw DataError("build_snapshots: no datasets given");
  if (state_names.empty()) throw DataError("build_snapshots: no state channels");
  for (const auto& ds : datasets) ds.validate();

  NormalizationStats stats;
  for (const auto& name : state_names) {
    const MeanStd ms = channel_stats(datasets, name);
    if (!(ms.std > 0.0)) {
      throw DegenerateChannelError("state channel '" + name +
                                   "' is constant and cannot be normalized");
    }
    stats.state_mean.push_back(ms.mean);
    stats.state_std.push_back(ms.std);
  }
  if (options.normalize_inputs) {
    for (const auto& name : input_names) {
      const MeanStd ms = channel_stats(datasets, name);
      if (!(ms.std > 0.0)) {
        throw DegenerateChannelError("input channel '" + name +
                                     "' is constant and cannot be normalized");
      }
      stats.input_mean.push_back(ms.mean);
      stats.input_std.push_back(ms.std);
    }
  }
  return fill_snapshots(datasets, state_names, input_names, stats);
}

SnapshotMatrices build_snapshots_with_stats(
    std::span<const TimeSeriesDataset> datasets,
    std::span<const std::string> state_names,
    std::span<const std::string> input_names,
    const NormalizationStats& stats) {
  if (datasets.empty()) throw DataError("build_snapshots: no datasets given");
  if (stats.state_mean.size() != state_names.size() ||
      stats.state_std.size() != state_names.size()) {
    throw ShapeError("normalization stats do not match the state channels");
  }
  if (stats.normalizes_inputs() &&
      stats.input_mean.size() != input_names.size()) {
    throw ShapeError("normalization stats do not match the input channels");
  }
  for (const auto& ds : datasets) ds.validate();
  return fill_snapshots(datasets, state_names, input_names, stats);
}

}  // namespace ksid
