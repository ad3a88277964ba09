#include "ksid/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "ksid/errors.hpp"
#include "ksid/surrogate.hpp"

namespace ksid {

namespace {

using nlohmann::json;

void check_keys(const json& object, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown config key '" +
                        (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (object.contains(key)) {
    try {
      target = object.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config key '") + key +
                        "' has the wrong type");
    }
  }
}

template <typename T>
bool read_flag(const json& object, const char* key, T& target) {
  if (!object.contains(key)) return false;
  read(object, key, target);
  return true;
}

}  // namespace

RunConfig default_config() {
  RunConfig config;
  config.state_names = surrogate_state_names();
  config.input_names = surrogate_input_names();
  config.narx_outputs = {
      {"N_t", 0.1, 20},
      {"T_tur_out", 2.0, 14},
  };
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " +
                      std::string(e.what()));
  }

  RunConfig config;
  config.state_names = surrogate_state_names();
  config.input_names = surrogate_input_names();
  config.narx_outputs = {
      {"N_t", 0.1, 20},
      {"T_tur_out", 2.0, 14},
  };

  check_keys(root, "",
             {"out_dir", "seed", "data", "channels", "dictionary",
              "regression", "simulation", "narx", "sweep", "surrogate"});
  read(root, "out_dir", config.out_dir);
  read(root, "seed", config.seed);

  if (root.contains("data")) {
    const auto& data = root.at("data");
    check_keys(data, "data", {"train", "test_transient", "test_steady"});
    read(data, "train", config.train_paths);
    read(data, "test_transient", config.test_transient_path);
    read(data, "test_steady", config.test_steady_path);
  }
  if (root.contains("channels")) {
    const auto& channels = root.at("channels");
    check_keys(channels, "channels", {"states", "inputs"});
    read(channels, "states", config.state_names);
    read(channels, "inputs", config.input_names);
  }
  if (root.contains("dictionary")) {
    const auto& dict = root.at("dictionary");
    check_keys(dict, "dictionary",
               {"family", "num_functions", "center_low", "center_high",
                "auto_bounds", "shape_parameter", "polynomial_degree", "seed"});
    read(dict, "family", config.dictionary_family);
    read(dict, "num_functions", config.num_functions);
    read(dict, "center_low", config.center_low);
    read(dict, "center_high", config.center_high);
    read(dict, "auto_bounds", config.auto_center_bounds);
    read(dict, "shape_parameter", config.shape_parameter);
    read(dict, "polynomial_degree", config.polynomial_degree);
    config.center_seed_set = read_flag(dict, "seed", config.center_seed);
  }
  if (root.contains("regression")) {
    const auto& reg = root.at("regression");
    check_keys(reg, "regression",
               {"rank_tolerance", "ridge", "normalize_inputs"});
    read(reg, "rank_tolerance", config.rank_tolerance);
    read(reg, "ridge", config.ridge);
    read(reg, "normalize_inputs", config.normalize_inputs);
  }
  if (root.contains("simulation")) {
    const auto& sim = root.at("simulation");
    check_keys(sim, "simulation", {"relift_each_step"});
    read(sim, "relift_each_step", config.relift_each_step);
  }
  if (root.contains("narx")) {
    const auto& narx = root.at("narx");
    check_keys(narx, "narx",
               {"outputs", "feedback_delay_s", "l2_penalty", "max_epochs",
                "seed", "lm_initial_damping", "lm_damping_factor"});
    if (narx.contains("outputs")) {
      config.narx_outputs.clear();
      for (const auto& entry : narx.at("outputs")) {
        check_keys(entry, "narx.outputs",
                   {"name", "input_delay_s", "hidden_neurons"});
        NarxOutputConfig out;
        read(entry, "name", out.name);
        read(entry, "input_delay_s", out.input_delay_s);
        read(entry, "hidden_neurons", out.hidden_neurons);
        if (out.name.empty()) {
          throw ConfigError("narx.outputs entries need a 'name'");
        }
        config.narx_outputs.push_back(std::move(out));
      }
    }
    read(narx, "feedback_delay_s", config.feedback_delay_s);
    read(narx, "l2_penalty", config.narx_l2_penalty);
    read(narx, "max_epochs", config.narx_max_epochs);
    config.narx_seed_set = read_flag(narx, "seed", config.narx_seed);
    read(narx, "lm_initial_damping", config.lm_initial_damping);
    read(narx, "lm_damping_factor", config.lm_damping_factor);
  }
  if (root.contains("sweep")) {
    const auto& sweep = root.at("sweep");
    check_keys(sweep, "sweep", {"rbf_counts"});
    read(sweep, "rbf_counts", config.sweep_counts);
  }
  if (root.contains("surrogate")) {
    const auto& surr = root.at("surrogate");
    check_keys(surr, "surrogate",
               {"train_cycles", "train_duration_s", "transient_duration_s",
                "steady_duration_s", "sample_rate", "substeps",
                "noise_sigma_speed", "noise_sigma_temp", "seed"});
    read(surr, "train_cycles", config.surrogate_train_cycles);
    read(surr, "train_duration_s", config.surrogate_train_duration_s);
    read(surr, "transient_duration_s", config.surrogate_transient_duration_s);
    read(surr, "steady_duration_s", config.surrogate_steady_duration_s);
    read(surr, "sample_rate", config.sample_rate);
    read(surr, "substeps", config.substeps);
    read(surr, "noise_sigma_speed", config.noise_sigma_speed);
    read(surr, "noise_sigma_temp", config.noise_sigma_temp);
    config.surrogate_seed_set = read_flag(surr, "seed", config.surrogate_seed);
  }
  return config;
}

void finalize_config(RunConfig& config) {
  if (!config.center_seed_set) {
    config.center_seed = config.seed * 31 + 7;
    config.center_seed_set = true;
  }
  if (!config.narx_seed_set) {
    config.narx_seed = config.seed * 31 + 1;
    config.narx_seed_set = true;
  }
  if (!config.surrogate_seed_set) {
    config.surrogate_seed = config.seed * 31 + 2;
    config.surrogate_seed_set = true;
  }

  if (config.out_dir.empty()) throw ConfigError("out_dir must not be empty");
  if (config.state_names.empty()) {
    throw ConfigError("channels.states must not be empty");
  }
  if (!(config.center_low < config.center_high)) {
    throw ConfigError("dictionary.center_low must be < center_high");
  }
  if (config.rank_tolerance < 0.0 || config.ridge < 0.0) {
    throw ConfigError("regression tolerances must be >= 0");
  }
  if (!(config.sample_rate > 0.0)) {
    throw ConfigError("surrogate.sample_rate must be > 0");
  }
  if (config.substeps < 1) throw ConfigError("surrogate.substeps must be >= 1");
  if (config.feedback_delay_s < 0.0) {
    throw ConfigError("narx.feedback_delay_s must be >= 0");
  }
  for (const auto& name : config.state_names) {
    for (const auto& other : config.input_names) {
      if (name == other) {
        throw ConfigError("channel '" + name + "' is both a state and an input");
      }
    }
  }
}

void require_train_data(const RunConfig& config) {
  if (config.train_paths.empty()) {
    throw ConfigError("config has no data.train files");
  }
  for (const auto& p : config.train_paths) {
    if (!std::filesystem::exists(p)) {
      throw ConfigError("training file does not exist: " + p);
    }
  }
}

void require_test_data(const RunConfig& config) {
  if (config.test_transient_path.empty() && config.test_steady_path.empty()) {
    throw ConfigError("config names no test data files");
  }
  for (const auto& p :
       {config.test_transient_path, config.test_steady_path}) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw ConfigError("test file does not exist: " + p);
    }
  }
}

std::string config_schema() {
  return R"(Configuration file schema (JSON). All keys optional unless stated;
command-line flags override file values.

{
  "out_dir": string          output directory (default "out")
  "seed": uint               master seed; unset sub-seeds derive from it

  "data": {
    "train": [string, ...]   training cycle CSV paths (fit, fit-narx, sweep)
    "test_transient": string transient test cycle CSV (evaluate, sweep)
    "test_steady": string    steady test cycle CSV (evaluate, sweep)
  }

  "channels": {
    "states": [string, ...]  state channel names (default: N_t, T_tur_out)
    "inputs": [string, ...]  input channel names (default: the 9 surrogate inputs)
  }

  "dictionary": {
    "family": string         identity_only | polyharmonic | gaussian |
                             multiquadric | inverse_quadratic |
                             inverse_multiquadric | polynomial
                             (default polyharmonic)
    "num_functions": uint    number of RBF centers (default 100)
    "center_low": number     center sampling bounds per normalized state
    "center_high": number    (default [-1.8, 1.8])
    "auto_bounds": bool      use min/max of normalized training states instead
    "shape_parameter": number RBF shape parameter epsilon (default 1.0)
    "polynomial_degree": uint for the polynomial family (default 2)
    "seed": uint             center sampling seed (default: derived)
  }

  "regression": {
    "rank_tolerance": number SVD cutoff; 0 = max(rows,cols)*eps*sigma_max
    "ridge": number          Tikhonov parameter, default 0 (off)
    "normalize_inputs": bool z-score inputs as well (default false)
  }

  "simulation": {
    "relift_each_step": bool diagnostic re-lifting rollout (default false)
  }

  "narx": {
    "outputs": [{            one network per output channel
      "name": string,
      "input_delay_s": number,
      "hidden_neurons": uint
    }, ...]                  default: N_t 0.1s/20, T_tur_out 2.0s/14
    "feedback_delay_s": number  default 0.01
    "l2_penalty": number     weight decay (default 1e-4)
    "max_epochs": uint       LM iterations (default 150)
    "seed": uint             init seed (default: derived)
    "lm_initial_damping": number  default 1e-3
    "lm_damping_factor": number   default 10
  }

  "sweep": {
    "rbf_counts": [uint,...] default [0, 50, 100, 150]
  }

  "surrogate": {
    "train_cycles": uint     default 3
    "train_duration_s": number      default 80
    "transient_duration_s": number  default 60
    "steady_duration_s": number     default 90
    "sample_rate": number    Hz, default 100
    "substeps": uint         RK4 substeps per sample, default 5
    "noise_sigma_speed": number  measurement noise sigma [rpm], default 0
    "noise_sigma_temp": number   measurement noise sigma [K], default 0
    "seed": uint             excitation seed (default: derived)
  }
}
)";
}

}  // namespace ksid
