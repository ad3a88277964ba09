// Uniformly sampled multi-channel records and the snapshot matrices built
// from them.
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksid/matrix.hpp"

namespace ksid {

enum class ChannelRole { State, Input };

struct Channel {
  std::string name;
  std::string unit;  // free-form label, may be empty
  ChannelRole role = ChannelRole::Input;
  std::vector<double> data;
};

struct TimeSeriesDataset {
  std::string name;
  double sample_rate = 0.0;  // Hz
  std::vector<Channel> channels;

  std::size_t length() const {
    return channels.empty() ? 0 : channels.front().data.size();
  }
  const Channel* find(std::string_view channel_name) const;
  const Channel& require(std::string_view channel_name) const;

  // Throws DataError unless all channels share a length >= 2, the rate is
  // positive, and every sample is finite.
  void validate() const;
};

struct NormalizationStats {
  // Per state channel; standard deviations are sample (N-1) and positive.
  std::vector<double> state_mean;
  std::vector<double> state_std;
  // Filled only when input normalization is enabled; otherwise empty and
  // inputs pass through in physical units.
  std::vector<double> input_mean;
  std::vector<double> input_std;

  bool normalizes_inputs() const { return !input_mean.empty(); }
};

struct SnapshotMatrices {
  Matrix x;  // n x N, normalized states at steps l
  Matrix y;  // n x N, normalized states at steps l+1
  Matrix u;  // m x N, inputs at steps l
  NormalizationStats stats;
};

struct SnapshotOptions {
  bool normalize_inputs = false;
};

// Builds X/Y/U snapshot pairs from one or more datasets. Normalization
// statistics are computed over the concatenation of the full state channels
// of all datasets; X/Y pairs never straddle a dataset boundary.
SnapshotMatrices build_snapshots(std::span<const TimeSeriesDataset> datasets,
                                 std::span<const std::string> state_names,
                                 std::span<const std::string> input_names,
                                 const SnapshotOptions& options = {});

// Same snapshot construction, but normalizing with previously computed
// statistics (e.g. a trained model's) instead of the datasets' own.
SnapshotMatrices build_snapshots_with_stats(
    std::span<const TimeSeriesDataset> datasets,
    std::span<const std::string> state_names,
    std::span<const std::string> input_names, const NormalizationStats& stats);

}  // namespace ksid
