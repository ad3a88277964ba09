// Command-line front end: surrogate data generation, model fitting,
// evaluation and the dictionary-size sweep.
//
// Deterministic outputs (tables, CSVs, model files) go to stdout and the
// output directory; progress logging goes to stderr.

#include <charconv>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ksid/config.hpp"
#include "ksid/csv.hpp"
#include "ksid/dataset.hpp"
#include "ksid/dictionary.hpp"
#include "ksid/edmd.hpp"
#include "ksid/errors.hpp"
#include "ksid/metrics.hpp"
#include "ksid/model_io.hpp"
#include "ksid/narx.hpp"
#include "ksid/report.hpp"
#include "ksid/surrogate.hpp"

namespace fs = std::filesystem;
using namespace ksid;

namespace {

void log_line(const std::string& message) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%H:%M:%S", std::localtime(&now));
  std::fprintf(stderr, "[%s] %s\n", stamp, message.c_str());
}

std::string full(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file");
  cmd->add_option("--out-dir", flags.out_dir, "output directory override");
  cmd->add_option("--seed", flags.seed, "master seed override");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config = flags.config_path.empty()
                         ? default_config()
                         : load_config(flags.config_path);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed.has_value()) config.seed = *flags.seed;
  finalize_config(config);
  fs::create_directories(config.out_dir);
  return config;
}

std::vector<TimeSeriesDataset> ingest_all(
    const std::vector<std::string>& paths) {
  std::vector<TimeSeriesDataset> datasets;
  for (const auto& p : paths) {
    log_line("ingesting " + p);
    datasets.push_back(ingest_csv(p));
  }
  return datasets;
}

DictionarySpec dictionary_from_config(const RunConfig& config,
                                      std::size_t num_functions,
                                      const SnapshotMatrices& snapshots) {
  const LiftFamily family = lift_family_from_string(config.dictionary_family);
  const std::size_t n = config.state_names.size();
  if (family == LiftFamily::IdentityOnly || num_functions == 0) {
    return make_identity_dictionary(n);
  }
  if (family == LiftFamily::Polynomial) {
    return make_polynomial_dictionary(n, config.polynomial_degree);
  }
  double low = config.center_low;
  double high = config.center_high;
  if (config.auto_center_bounds) {
    low = snapshots.x(0, 0);
    high = snapshots.x(0, 0);
    for (const Matrix* m : {&snapshots.x, &snapshots.y}) {
      for (std::size_t i = 0; i < m->size(); ++i) {
        low = std::min(low, m->data()[i]);
        high = std::max(high, m->data()[i]);
      }
    }
  }
  return make_rbf_dictionary(family, num_functions, n, low, high,
                             config.center_seed, config.shape_parameter);
}

void write_fit_report(const fs::path& path, const FitReport& report,
                      const DictionarySpec& dict) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write fit report: " + path.string());
  out << "dictionary_family: " << to_string(dict.family) << '\n'
      << "num_functions: " << dict.num_functions() << '\n'
      << "lifted_dim: " << report.lifted_dim << '\n'
      << "snapshot_count: " << report.snapshot_count << '\n'
      << "effective_rank: " << report.effective_rank << '\n'
      << "lifted_residual_norm: " << full(report.lifted_residual_norm) << '\n'
      << "one_step_state_residual: " << full(report.state_residual_norm)
      << '\n';
}

struct FittedKoopman {
  KoopmanModel model;
  FitReport report;
};

FittedKoopman fit_from_config(const RunConfig& config,
                              std::span<const TimeSeriesDataset> datasets,
                              std::size_t num_functions) {
  SnapshotOptions snap_opts;
  snap_opts.normalize_inputs = config.normalize_inputs;
  const SnapshotMatrices snapshots = build_snapshots(
      datasets, config.state_names, config.input_names, snap_opts);
  const DictionarySpec dict =
      dictionary_from_config(config, num_functions, snapshots);

  FitOptions fit_opts;
  fit_opts.rank_tolerance = config.rank_tolerance;
  fit_opts.ridge = config.ridge;

  FittedKoopman fitted;
  fitted.model = fit(snapshots, dict, fit_opts, &fitted.report);
  fitted.model.state_channels = config.state_names;
  fitted.model.input_channels = config.input_names;
  fitted.model.sample_rate = datasets.front().sample_rate;
  return fitted;
}

// -------------------------------------------------------------------------
// gen-data

void cmd_gen_data(const RunConfig& config) {
  PlantParams params;
  DutyCycleOptions options;
  options.train_cycles = config.surrogate_train_cycles;
  options.train_duration_s = config.surrogate_train_duration_s;
  options.transient_duration_s = config.surrogate_transient_duration_s;
  options.steady_duration_s = config.surrogate_steady_duration_s;
  options.sample_rate = config.sample_rate;
  options.substeps = config.substeps;
  if (config.noise_sigma_speed > 0.0 || config.noise_sigma_temp > 0.0) {
    options.noise_sigma = {config.noise_sigma_speed, config.noise_sigma_temp};
  }

  log_line("generating surrogate duty cycles");
  const DutyCycles cycles =
      make_duty_cycles(params, config.surrogate_seed, options);

  const fs::path dir(config.out_dir);
  for (const auto& ds : cycles.train) {
    const fs::path path = dir / (ds.name + ".csv");
    export_csv(ds, path);
    std::cout << path.string() << '\n';
  }
  export_csv(cycles.transient_test, dir / "test_transient.csv");
  std::cout << (dir / "test_transient.csv").string() << '\n';
  export_csv(cycles.steady_test, dir / "test_steady.csv");
  std::cout << (dir / "test_steady.csv").string() << '\n';
}

// -------------------------------------------------------------------------
// fit

void cmd_fit(const RunConfig& config) {
  require_train_data(config);
  const std::vector<TimeSeriesDataset> datasets = ingest_all(config.train_paths);
  log_line("fitting lifted-linear model (" +
           std::to_string(config.num_functions) + " functions)");
  const FittedKoopman fitted =
      fit_from_config(config, datasets, config.num_functions);

  const fs::path dir(config.out_dir);
  save_model(fitted.model, dir / "koopman.ksm");
  write_fit_report(dir / "fit_report.txt", fitted.report,
                   fitted.model.dictionary);
  std::cout << "model: " << (dir / "koopman.ksm").string() << '\n'
            << "lifted_residual_norm: "
            << full(fitted.report.lifted_residual_norm) << '\n'
            << "one_step_state_residual: "
            << full(fitted.report.state_residual_norm) << '\n';
}

// -------------------------------------------------------------------------
// fit-narx

void cmd_fit_narx(const RunConfig& config) {
  require_train_data(config);
  if (config.narx_outputs.empty()) {
    throw ConfigError("config has no narx.outputs");
  }
  const std::vector<TimeSeriesDataset> datasets = ingest_all(config.train_paths);
  const double rate = datasets.front().sample_rate;

  const fs::path dir(config.out_dir);
  std::ofstream report_file(dir / "narx_report.txt", std::ios::trunc);
  for (const auto& output : config.narx_outputs) {
    NarxConfig narx_config;
    narx_config.input_delay_steps =
        delay_steps_from_seconds(output.input_delay_s, rate);
    narx_config.feedback_delay_steps =
        std::max<std::size_t>(
            delay_steps_from_seconds(config.feedback_delay_s, rate), 1);
    narx_config.hidden_neurons = output.hidden_neurons;
    narx_config.l2_penalty = config.narx_l2_penalty;
    narx_config.max_epochs = config.narx_max_epochs;
    narx_config.seed = config.narx_seed;
    narx_config.lm_initial_damping = config.lm_initial_damping;
    narx_config.lm_damping_factor = config.lm_damping_factor;

    log_line("training narx for " + output.name + " (" +
             std::to_string(output.hidden_neurons) + " neurons)");
    TrainReport train_report;
    const NarxModel model = train(datasets, narx_config, output.name,
                                  config.input_names, &train_report);
    const fs::path model_path = dir / ("narx_" + output.name + ".ksm");
    save_model(model, model_path);

    report_file << "output: " << output.name << '\n'
                << "  epochs: " << train_report.epochs << '\n'
                << "  accepted_steps: "
                << train_report.accepted_losses.size() - 1 << '\n'
                << "  initial_loss: " << full(train_report.accepted_losses.front())
                << '\n'
                << "  final_loss: " << full(train_report.accepted_losses.back())
                << '\n'
                << "  stop_reason: " << train_report.stop_reason << '\n';
    std::cout << "model: " << model_path.string()
              << " final_loss: " << full(train_report.accepted_losses.back())
              << '\n';
  }
}

// -------------------------------------------------------------------------
// evaluate

struct CycleEvaluation {
  std::vector<ComparisonRow> rows;
  double one_step_residual = 0.0;
};

CycleEvaluation evaluate_cycle(const KoopmanModel& koopman,
                               std::span<const NarxModel> narx_models,
                               const TimeSeriesDataset& dataset,
                               const std::string& cycle_name,
                               const fs::path& trajectory_path) {
  const std::size_t n = koopman.state_dim();
  const std::size_t length = dataset.length();

  Matrix measured(n, length);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& data = dataset.require(koopman.state_channels[i]).data;
    for (std::size_t l = 0; l < length; ++l) measured(i, l) = data[l];
  }
  Matrix inputs(koopman.input_dim(), length);
  for (std::size_t i = 0; i < koopman.input_dim(); ++i) {
    const auto& data = dataset.require(koopman.input_channels[i]).data;
    for (std::size_t l = 0; l < length; ++l) inputs(i, l) = data[l];
  }

  std::vector<double> x0(n);
  for (std::size_t i = 0; i < n; ++i) x0[i] = measured(i, 0);
  const Matrix predicted = simulate(koopman, x0, inputs);

  CycleEvaluation eval;
  const std::string edmd_label =
      "EDMD (N_RBF=" + std::to_string(koopman.dictionary.num_functions()) + ")";
  const std::vector<MetricReport> edmd_metrics =
      evaluate_channels(measured, predicted, koopman.state_channels);
  for (const auto& metric : edmd_metrics) {
    eval.rows.push_back({cycle_name, metric.channel, edmd_label, metric});
  }

  // NARX rollouts start after their delay lookback; the warm-up region is
  // padded with the measured signal in the trajectory file and excluded
  // from the metrics.
  std::vector<std::vector<double>> narx_tracks(narx_models.size());
  std::vector<std::size_t> narx_starts(narx_models.size(), 0);
  for (std::size_t k = 0; k < narx_models.size(); ++k) {
    const NarxModel& model = narx_models[k];
    narx_tracks[k] = evaluate_on_dataset(model, dataset, &narx_starts[k]);
    const auto& y = dataset.require(model.output_channel).data;
    const std::span<const double> measured_tail(
        y.data() + narx_starts[k], y.size() - narx_starts[k]);
    MetricReport metric;
    metric.channel = model.output_channel;
    metric.nrmse = nrmse(measured_tail, narx_tracks[k]);
    metric.nrmse_measured_mean =
        nrmse_measured_mean(measured_tail, narx_tracks[k]);
    metric.r_squared = r_squared(measured_tail, narx_tracks[k]);
    metric.mape = mape(measured_tail, narx_tracks[k]);
    metric.n_points = narx_tracks[k].size();
    eval.rows.push_back({cycle_name, model.output_channel, "NARX", metric});
  }

  // Trajectory CSV for external plotting.
  std::ofstream traj(trajectory_path, std::ios::trunc);
  if (!traj) {
    throw DataError("cannot write trajectory file: " +
                    trajectory_path.string());
  }
  traj << "time_s";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& name = koopman.state_channels[i];
    traj << ',' << name << "_measured," << name << "_edmd";
  }
  for (const auto& model : narx_models) {
    traj << ',' << model.output_channel << "_narx";
  }
  traj << '\n';
  for (std::size_t l = 0; l < length; ++l) {
    traj << full(static_cast<double>(l) / dataset.sample_rate);
    for (std::size_t i = 0; i < n; ++i) {
      traj << ',' << full(measured(i, l)) << ',' << full(predicted(i, l));
    }
    for (std::size_t k = 0; k < narx_models.size(); ++k) {
      const double value =
          l < narx_starts[k]
              ? dataset.require(narx_models[k].output_channel).data[l]
              : narx_tracks[k][l - narx_starts[k]];
      traj << ',' << full(value);
    }
    traj << '\n';
  }

  const TimeSeriesDataset* one = &dataset;
  const SnapshotMatrices snapshots = build_snapshots_with_stats(
      {one, 1}, koopman.state_channels, koopman.input_channels, koopman.stats);
  eval.one_step_residual = one_step_state_residual(koopman, snapshots);
  return eval;
}

void cmd_evaluate(const RunConfig& config, const std::string& model_flag,
                  const std::vector<std::string>& narx_flags) {
  require_test_data(config);
  const fs::path dir(config.out_dir);

  const fs::path model_path =
      model_flag.empty() ? dir / "koopman.ksm" : fs::path(model_flag);
  if (!fs::exists(model_path)) {
    throw ConfigError("koopman model file does not exist: " +
                      model_path.string());
  }
  const KoopmanModel koopman = load_koopman_model(model_path);

  std::vector<NarxModel> narx_models;
  if (!narx_flags.empty()) {
    for (const auto& p : narx_flags) narx_models.push_back(load_narx_model(p));
  } else {
    for (const auto& output : config.narx_outputs) {
      const fs::path p = dir / ("narx_" + output.name + ".ksm");
      if (fs::exists(p)) narx_models.push_back(load_narx_model(p));
    }
  }

  std::vector<ComparisonRow> all_rows;
  for (const auto& [cycle_name, path] :
       std::vector<std::pair<std::string, std::string>>{
           {"transient", config.test_transient_path},
           {"steady", config.test_steady_path}}) {
    if (path.empty()) continue;
    log_line("evaluating on " + path);
    const TimeSeriesDataset dataset = ingest_csv(path);
    const CycleEvaluation eval =
        evaluate_cycle(koopman, narx_models, dataset, cycle_name,
                       dir / ("trajectory_" + cycle_name + ".csv"));

    std::vector<MetricReport> cycle_metrics;
    for (const auto& row : eval.rows) {
      MetricReport metric = row.metrics;
      metric.channel = row.method + " " + row.channel;
      cycle_metrics.push_back(metric);
    }
    const std::string table = format_metric_table(
        "Prediction accuracy, " + cycle_name + " test cycle", cycle_metrics);
    std::ofstream txt(dir / ("metrics_" + cycle_name + ".txt"),
                      std::ios::trunc);
    txt << table << "one_step_state_residual: "
        << full(eval.one_step_residual) << '\n';
    write_metric_csv(dir / ("metrics_" + cycle_name + ".csv"), cycle_metrics);

    std::cout << table << "one_step_state_residual: "
              << full(eval.one_step_residual) << "\n\n";
    all_rows.insert(all_rows.end(), eval.rows.begin(), eval.rows.end());
  }

  const std::string comparison = format_comparison_table(all_rows);
  std::ofstream cmp(dir / "comparison.txt", std::ios::trunc);
  cmp << comparison;
  write_comparison_csv(dir / "comparison.csv", all_rows);
  std::cout << comparison;
}

// -------------------------------------------------------------------------
// sweep

void cmd_sweep(const RunConfig& config) {
  require_train_data(config);
  require_test_data(config);
  const std::vector<TimeSeriesDataset> train = ingest_all(config.train_paths);

  std::vector<std::pair<std::string, TimeSeriesDataset>> tests;
  if (!config.test_transient_path.empty()) {
    tests.emplace_back("transient", ingest_csv(config.test_transient_path));
  }
  if (!config.test_steady_path.empty()) {
    tests.emplace_back("steady", ingest_csv(config.test_steady_path));
  }

  const fs::path dir(config.out_dir);
  std::vector<SweepRow> sweep_rows;
  for (const std::size_t count : config.sweep_counts) {
    log_line("sweep: fitting with " + std::to_string(count) + " functions");
    const FittedKoopman fitted = fit_from_config(config, train, count);

    const fs::path run_dir = dir / ("run_rbf_" + std::to_string(count));
    fs::create_directories(run_dir);
    save_model(fitted.model, run_dir / "koopman.ksm");
    write_fit_report(run_dir / "fit_report.txt", fitted.report,
                     fitted.model.dictionary);

    for (const auto& [cycle_name, dataset] : tests) {
      const CycleEvaluation eval =
          evaluate_cycle(fitted.model, {}, dataset, cycle_name,
                         run_dir / ("trajectory_" + cycle_name + ".csv"));
      for (const auto& row : eval.rows) {
        SweepRow sweep_row;
        sweep_row.rbf_count = count;
        sweep_row.cycle = cycle_name;
        sweep_row.channel = row.channel;
        sweep_row.metrics = row.metrics;
        sweep_row.train_state_residual = fitted.report.state_residual_norm;
        sweep_rows.push_back(std::move(sweep_row));
      }
    }
  }

  const std::string table = format_sweep_table(sweep_rows);
  std::ofstream txt(dir / "sweep.txt", std::ios::trunc);
  txt << table;
  write_sweep_csv(dir / "sweep.csv", sweep_rows);
  std::cout << table;
}

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "numerical divergence: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifted-linear (EDMD) and NARX system identification toolkit"};
  app.require_subcommand(0, 1);

  bool print_schema = false;
  app.add_flag("--print-schema", print_schema,
               "print the configuration file schema and exit");

  CommonFlags gen_flags;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "generate surrogate train/test duty-cycle CSVs");
  add_common_flags(gen, gen_flags);

  CommonFlags fit_flags;
  std::optional<std::size_t> fit_num_functions;
  std::optional<std::string> fit_family;
  std::optional<double> fit_ridge;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "fit the lifted-linear model from training CSVs");
  add_common_flags(fit_cmd, fit_flags);
  fit_cmd->add_option("--num-functions", fit_num_functions,
                      "dictionary size override");
  fit_cmd->add_option("--family", fit_family, "dictionary family override");
  fit_cmd->add_option("--ridge", fit_ridge, "ridge parameter override");

  CommonFlags narx_flags;
  CLI::App* narx_cmd = app.add_subcommand(
      "fit-narx", "train the NARX baseline networks from training CSVs");
  add_common_flags(narx_cmd, narx_flags);

  CommonFlags eval_flags;
  std::string eval_model;
  std::vector<std::string> eval_narx_models;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "simulate models on the test CSVs and emit metric tables");
  add_common_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--model", eval_model,
                       "koopman model file (default <out-dir>/koopman.ksm)");
  eval_cmd->add_option("--narx-model", eval_narx_models,
                       "narx model file(s) (default <out-dir>/narx_*.ksm)");

  CommonFlags sweep_flags;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "fit+evaluate across the configured dictionary sizes");
  add_common_flags(sweep_cmd, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are configuration errors
  }

  if (print_schema) {
    std::cout << config_schema();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 0;
  }

  if (gen->parsed()) {
    return run_guarded([&] { cmd_gen_data(resolve_config(gen_flags)); });
  }
  if (fit_cmd->parsed()) {
    return run_guarded([&] {
      RunConfig config = resolve_config(fit_flags);
      if (fit_num_functions.has_value()) {
        config.num_functions = *fit_num_functions;
      }
      if (fit_family.has_value()) config.dictionary_family = *fit_family;
      if (fit_ridge.has_value()) config.ridge = *fit_ridge;
      cmd_fit(config);
    });
  }
  if (narx_cmd->parsed()) {
    return run_guarded([&] { cmd_fit_narx(resolve_config(narx_flags)); });
  }
  if (eval_cmd->parsed()) {
    return run_guarded([&] {
      cmd_evaluate(resolve_config(eval_flags), eval_model, eval_narx_models);
    });
  }
  if (sweep_cmd->parsed()) {
    return run_guarded([&] { cmd_sweep(resolve_config(sweep_flags)); });
  }
  return 0;
}
