// Time-delayed single-hidden-layer network baseline: one network per output
// channel, regressor [y_{l-fb}, u_{l-d}] (first-order form), tanh hidden
// layer, linear output, trained by damped least squares (Levenberg-
// Marquardt) on the teacher-forced one-step error, evaluated closed-loop.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ksid/dataset.hpp"
#include "ksid/matrix.hpp"

namespace ksid {

struct NarxConfig {
  std::size_t input_delay_steps = 1;     // taps u at l - input_delay_steps
  std::size_t feedback_delay_steps = 1;  // taps y at l - feedback_delay_steps
  std::size_t hidden_neurons = 10;
  double l2_penalty = 1e-4;  // fixed weight decay on the weight matrices
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
  double lm_initial_damping = 1e-3;
  double lm_damping_factor = 10.0;

  void validate() const;
};

// Rounds a delay given in seconds to whole samples.
std::size_t delay_steps_from_seconds(double seconds, double sample_rate);

struct NarxModel {
  NarxConfig config;
  Matrix input_weights;  // hidden x regressor_dim
  std::vector<double> input_bias;      // hidden
  std::vector<double> output_weights;  // hidden
  double output_bias = 0.0;
  std::string output_channel;
  std::vector<std::string> input_channels;
  // z-score statistics for the regressor channels; index 0 is the output
  // channel (used for both the feedback entry and target denormalization),
  // indices 1.. are the inputs in order.
  std::vector<double> regressor_mean;
  std::vector<double> regressor_std;
  double sample_rate = 0.0;

  std::size_t regressor_dim() const { return 1 + input_channels.size(); }
};

struct RegressorSet {
  Matrix regressors;            // rows are samples, normalized
  std::vector<double> targets;  // normalized
};

// Builds the teacher-forced regressor rows for one dataset. Rows before the
// largest delay are dropped; all channels are z-scored with statistics from
// this dataset. Throws DataError if the dataset cannot cover the delays.
RegressorSet build_regressors(const TimeSeriesDataset& dataset,
                              const NarxConfig& config,
                              const std::string& output_name,
                              std::span<const std::string> input_names);

// Network output in normalized units for a normalized regressor row.
double forward(const NarxModel& model, std::span<const double> regressor);
// Same, denormalized to physical units of the output channel.
double forward_physical(const NarxModel& model,
                        std::span<const double> regressor);

struct TrainReport {
  // Training loss after each *accepted* step; element 0 is the initial loss.
  // Monotone non-increasing by construction.
  std::vector<double> accepted_losses;
  std::size_t epochs = 0;
  double final_gradient_norm = 0.0;
  std::string stop_reason;
};

// Minimizes mean squared one-step error + l2_penalty * ||weights||^2 with a
// Levenberg-Marquardt loop (analytic Jacobian, damped normal equations).
// Deterministic for a fixed seed and config; Jacobian assembly parallelizes
// over rows with results independent of the worker count.
NarxModel train(std::span<const TimeSeriesDataset> datasets,
                const NarxConfig& config, const std::string& output_name,
                std::span<const std::string> input_names,
                TrainReport* report = nullptr);

// Rolls the network forward feeding its own (delayed) predictions back.
//
// With fb = feedback_delay_steps, d = input_delay_steps, L = max(fb, d), the
// first simulated step is some absolute sample index `start`:
//   - initial_history holds the measured output at start-fb .. start-1
//     (physical units, length >= fb; the trailing fb entries are used);
//   - inputs is m x (L + steps), column c holding the inputs at absolute
//     index start - L + c.
// Returns `steps` physical-unit predictions for indices start .. start+steps-1.
std::vector<double> simulate_closed_loop(const NarxModel& model,
                                         std::span<const double> initial_history,
                                         const Matrix& inputs,
                                         std::size_t steps);

// Convenience wrapper: closed-loop simulation across a full dataset, seeded
// with its measured history. Returns predictions for samples
// [start_index, dataset.length()).
std::vector<double> evaluate_on_dataset(const NarxModel& model,
                                        const TimeSeriesDataset& dataset,
                                        std::size_t* start_index = nullptr);

// Jacobian of the network output w.r.t. the packed parameter vector
// [input_weights row-major, input_bias, output_weights, output_bias], one
// row per regressor sample. The parallel variant is bit-identical to the
// serial one. Exposed for verification and benchmarking.
Matrix narx_jacobian(const NarxModel& model, const Matrix& regressors);
Matrix narx_jacobian_serial(const NarxModel& model, const Matrix& regressors);

void save_model(const NarxModel& model, const std::filesystem::path& path);
NarxModel load_narx_model(const std::filesystem::path& path);

}  // namespace ksid
