// Run configuration: a single JSON file with sectioned keys, overridable
// from the command line. Unknown keys are rejected so typos fail fast.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ksid {

struct NarxOutputConfig {
  std::string name;
  double input_delay_s = 0.1;
  std::size_t hidden_neurons = 20;
};

struct RunConfig {
  std::string out_dir = "out";
  std::uint64_t seed = 42;

  // data
  std::vector<std::string> train_paths;
  std::string test_transient_path;
  std::string test_steady_path;

  // channels
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;

  // dictionary
  std::string dictionary_family = "polyharmonic";
  std::size_t num_functions = 100;
  double center_low = -1.8;
  double center_high = 1.8;
  // Override the fixed bounds with the empirical min/max of the normalized
  // training states.
  bool auto_center_bounds = false;
  double shape_parameter = 1.0;
  std::size_t polynomial_degree = 2;
  std::uint64_t center_seed = 0;
  bool center_seed_set = false;

  // regression
  double rank_tolerance = 0.0;
  double ridge = 0.0;
  bool normalize_inputs = false;

  // simulation
  bool relift_each_step = false;

  // narx
  std::vector<NarxOutputConfig> narx_outputs;
  double feedback_delay_s = 0.01;
  double narx_l2_penalty = 1e-4;
  std::size_t narx_max_epochs = 150;
  std::uint64_t narx_seed = 0;
  bool narx_seed_set = false;
  double lm_initial_damping = 1e-3;
  double lm_damping_factor = 10.0;

  // sweep
  std::vector<std::size_t> sweep_counts = {0, 50, 100, 150};

  // surrogate generation
  std::size_t surrogate_train_cycles = 3;
  double surrogate_train_duration_s = 80.0;
  double surrogate_transient_duration_s = 60.0;
  double surrogate_steady_duration_s = 90.0;
  double sample_rate = 100.0;
  std::size_t substeps = 5;
  double noise_sigma_speed = 0.0;
  double noise_sigma_temp = 0.0;
  std::uint64_t surrogate_seed = 0;
  bool surrogate_seed_set = false;
};

// Parses the JSON config file. Throws ConfigError on unknown keys or type
// mismatches. Defaults (including the surrogate channel names) are applied
// for missing keys.
RunConfig load_config(const std::filesystem::path& path);

// Defaults without a file. Run finalize_config before use.
RunConfig default_config();

// Derives unset sub-seeds from the master seed and sanity-checks ranges.
// Call after command-line overrides have been applied.
void finalize_config(RunConfig& config);

// Existence/consistency checks for the pieces a command needs.
void require_train_data(const RunConfig& config);
void require_test_data(const RunConfig& config);

// Human-readable schema for --print-schema.
std::string config_schema();

}  // namespace ksid
