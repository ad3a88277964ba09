#include "ksid/narx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "json.hpp"
#include "ksid/errors.hpp"
#include "ksid/kernels.hpp"
#include "ksid/linalg.hpp"
#include "ksid/model_io.hpp"
#include "ksid/rng.hpp"

namespace ksid {

void NarxConfig::validate() const {
  if (hidden_neurons < 1) throw ConfigError("narx: hidden_neurons must be >= 1");
  if (feedback_delay_steps < 1) {
    throw ConfigError("narx: feedback delay must be >= 1 step");
  }
  if (l2_penalty < 0.0) throw ConfigError("narx: l2_penalty must be >= 0");
  if (!(lm_initial_damping > 0.0)) {
    throw ConfigError("narx: lm_initial_damping must be > 0");
  }
  if (!(lm_damping_factor > 1.0)) {
    throw ConfigError("narx: lm_damping_factor must be > 1");
  }
}

std::size_t delay_steps_from_seconds(double seconds, double sample_rate) {
  if (seconds < 0.0 || !(sample_rate > 0.0)) {
    throw ConfigError("delay conversion needs seconds >= 0 and rate > 0");
  }
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

namespace {

// Parameter packing: input_weights row-major, input_bias, output_weights,
// output_bias. All training math runs on this flat vector.
struct ParamLayout {
  std::size_t hidden;
  std::size_t reg_dim;
  std::size_t count() const { return hidden * (reg_dim + 2) + 1; }
  std::size_t input_weight(std::size_t i, std::size_t j) const {
    return i * reg_dim + j;
  }
  std::size_t input_bias(std::size_t i) const {
    return hidden * reg_dim + i;
  }
  std::size_t output_weight(std::size_t i) const {
    return hidden * (reg_dim + 1) + i;
  }
  std::size_t output_bias() const { return hidden * (reg_dim + 2); }
};

std::vector<double> pack_params(const NarxModel& model) {
  const ParamLayout layout{model.config.hidden_neurons, model.regressor_dim()};
  std::vector<double> theta(layout.count());
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    for (std::size_t j = 0; j < layout.reg_dim; ++j) {
      theta[layout.input_weight(i, j)] = model.input_weights(i, j);
    }
    theta[layout.input_bias(i)] = model.input_bias[i];
    theta[layout.output_weight(i)] = model.output_weights[i];
  }
  theta[layout.output_bias()] = model.output_bias;
  return theta;
}

void unpack_params(std::span<const double> theta, NarxModel& model) {
  const ParamLayout layout{model.config.hidden_neurons, model.regressor_dim()};
  model.input_weights = Matrix(layout.hidden, layout.reg_dim);
  model.input_bias.assign(layout.hidden, 0.0);
  model.output_weights.assign(layout.hidden, 0.0);
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    for (std::size_t j = 0; j < layout.reg_dim; ++j) {
      model.input_weights(i, j) = theta[layout.input_weight(i, j)];
    }
    model.input_bias[i] = theta[layout.input_bias(i)];
    model.output_weights[i] = theta[layout.output_weight(i)];
  }
  model.output_bias = theta[layout.output_bias()];
}

double forward_flat(const ParamLayout& layout, std::span<const double> theta,
                    std::span<const double> regressor) {
  double out = theta[layout.output_bias()];
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    double a = theta[layout.input_bias(i)];
    const double* w = theta.data() + layout.input_weight(i, 0);
    for (std::size_t j = 0; j < layout.reg_dim; ++j) a += w[j] * regressor[j];
    out += theta[layout.output_weight(i)] * std::tanh(a);
  }
  return out;
}

// One Jacobian row: d net / d theta at this regressor.
void jacobian_row(const ParamLayout& layout, std::span<const double> theta,
                  std::span<const double> regressor, double* row) {
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    double a = theta[layout.input_bias(i)];
    const double* w = theta.data() + layout.input_weight(i, 0);
    for (std::size_t j = 0; j < layout.reg_dim; ++j) a += w[j] * regressor[j];
    const double h = std::tanh(a);
    const double dh = 1.0 - h * h;
    const double wo = theta[layout.output_weight(i)];
    for (std::size_t j = 0; j < layout.reg_dim; ++j) {
      row[layout.input_weight(i, j)] = wo * dh * regressor[j];
    }
    row[layout.input_bias(i)] = wo * dh;
    row[layout.output_weight(i)] = h;
  }
  row[layout.output_bias()] = 1.0;
}

void fill_jacobian(const ParamLayout& layout, std::span<const double> theta,
                   const Matrix& regressors, Matrix& jac, bool parallel) {
  const std::int64_t rows = static_cast<std::int64_t>(regressors.rows());
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < rows; ++p) {
      jacobian_row(layout, theta, regressors.row(static_cast<std::size_t>(p)),
                   jac.row(static_cast<std::size_t>(p)).data());
    }
  } else {
    for (std::int64_t p = 0; p < rows; ++p) {
      jacobian_row(layout, theta, regressors.row(static_cast<std::size_t>(p)),
                   jac.row(static_cast<std::size_t>(p)).data());
    }
  }
}

struct ChannelStats {
  std::vector<double> mean;  // [output, inputs...]
  std::vector<double> std;
};

ChannelStats regressor_channel_stats(
    std::span<const TimeSeriesDataset> datasets, const std::string& output_name,
    std::span<const std::string> input_names) {
  std::vector<std::string> names;
  names.push_back(output_name);
  names.insert(names.end(), input_names.begin(), input_names.end());

  ChannelStats stats;
  for (const auto& name : names) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& ds : datasets) {
      for (double v : ds.require(name).data) {
        sum += v;
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (const auto& ds : datasets) {
      for (double v : ds.require(name).data) sq += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(sq / static_cast<double>(count - 1));
    if (!(sd > 0.0)) {
      throw DegenerateChannelError("narx: channel '" + name +
                                   "' is constant and cannot be normalized");
    }
    stats.mean.push_back(mean);
    stats.std.push_back(sd);
  }
  return stats;
}

RegressorSet build_regressors_with_stats(const TimeSeriesDataset& dataset,
                                         const NarxConfig& config,
                                         const std::string& output_name,
                                         std::span<const std::string> input_names,
                                         const ChannelStats& stats) {
  dataset.validate();
  const std::size_t max_delay =
      std::max(config.input_delay_steps, config.feedback_delay_steps);
  if (dataset.length() <= max_delay) {
    throw DataError("narx: dataset '" + dataset.name + "' has " +
                    std::to_string(dataset.length()) +
                    " samples, shorter than the largest delay of " +
                    std::to_string(max_delay));
  }
  const std::size_t rows = dataset.length() - max_delay;
  const std::size_t m = input_names.size();

  const auto& y = dataset.require(output_name).data;
  std::vector<const std::vector<double>*> inputs;
  for (const auto& name : input_names) inputs.push_back(&dataset.require(name).data);

  RegressorSet set;
  set.regressors = Matrix(rows, 1 + m);
  set.targets.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t l = r + max_delay;
    set.regressors(r, 0) =
        (y[l - config.feedback_delay_steps] - stats.mean[0]) / stats.std[0];
    for (std::size_t i = 0; i < m; ++i) {
      set.regressors(r, 1 + i) =
          ((*inputs[i])[l - config.input_delay_steps] - stats.mean[1 + i]) /
          stats.std[1 + i];
    }
    set.targets[r] = (y[l] - stats.mean[0]) / stats.std[0];
  }
  return set;
}

}  // namespace

RegressorSet build_regressors(const TimeSeriesDataset& dataset,
                              const NarxConfig& config,
                              const std::string& output_name,
                              std::span<const std::string> input_names) {
  config.validate();
  const TimeSeriesDataset* one = &dataset;
  const ChannelStats stats =
      regressor_channel_stats({one, 1}, output_name, input_names);
  return build_regressors_with_stats(dataset, config, output_name, input_names,
                                     stats);
}

double forward(const NarxModel& model, std::span<const double> regressor) {
  if (regressor.size() != model.regressor_dim()) {
    throw ShapeError("narx forward: regressor has wrong dimension");
  }
  const ParamLayout layout{model.config.hidden_neurons, model.regressor_dim()};
  const std::vector<double> theta = pack_params(model);
  return forward_flat(layout, theta, regressor);
}

double forward_physical(const NarxModel& model,
                        std::span<const double> regressor) {
  return forward(model, regressor) * model.regressor_std[0] +
         model.regressor_mean[0];
}

Matrix narx_jacobian(const NarxModel& model, const Matrix& regressors) {
  const ParamLayout layout{model.config.hidden_neurons, model.regressor_dim()};
  if (regressors.cols() != layout.reg_dim) {
    throw ShapeError("narx_jacobian: regressor dimension mismatch");
  }
  const std::vector<double> theta = pack_params(model);
  Matrix jac(regressors.rows(), layout.count());
  fill_jacobian(layout, theta, regressors, jac, true);
  return jac;
}

Matrix narx_jacobian_serial(const NarxModel& model, const Matrix& regressors) {
  const ParamLayout layout{model.config.hidden_neurons, model.regressor_dim()};
  if (regressors.cols() != layout.reg_dim) {
    throw ShapeError("narx_jacobian: regressor dimension mismatch");
  }
  const std::vector<double> theta = pack_params(model);
  Matrix jac(regressors.rows(), layout.count());
  fill_jacobian(layout, theta, regressors, jac, false);
  return jac;
}

namespace {

// Loss = mean squared residual + l2 * ||weight matrices||^2 (biases are not
// penalized).
double training_loss(const ParamLayout& layout, std::span<const double> theta,
                     const Matrix& regressors, std::span<const double> targets,
                     double l2, std::vector<double>& residuals) {
  const std::size_t rows = regressors.rows();
  residuals.resize(rows);
  double sq = 0.0;
  for (std::size_t p = 0; p < rows; ++p) {
    const double r = forward_flat(layout, theta, regressors.row(p)) - targets[p];
    residuals[p] = r;
    sq += r * r;
  }
  double penalty = 0.0;
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    for (std::size_t j = 0; j < layout.reg_dim; ++j) {
      const double w = theta[layout.input_weight(i, j)];
      penalty += w * w;
    }
    const double wo = theta[layout.output_weight(i)];
    penalty += wo * wo;
  }
  return sq / static_cast<double>(rows) + l2 * penalty;
}

bool is_weight_coordinate(const ParamLayout& layout, std::size_t k) {
  return k < layout.hidden * layout.reg_dim ||
         (k >= layout.hidden * (layout.reg_dim + 1) &&
          k < layout.hidden * (layout.reg_dim + 2));
}

}  // namespace

NarxModel train(std::span<const TimeSeriesDataset> datasets,
                const NarxConfig& config, const std::string& output_name,
                std::span<const std::string> input_names,
                TrainReport* report) {
  config.validate();
  if (datasets.empty()) throw DataError("narx train: no datasets given");

  const ChannelStats stats =
      regressor_channel_stats(datasets, output_name, input_names);

  std::size_t total_rows = 0;
  std::vector<RegressorSet> sets;
  for (const auto& ds : datasets) {
    sets.push_back(build_regressors_with_stats(ds, config, output_name,
                                               input_names, stats));
    total_rows += sets.back().regressors.rows();
  }
  const std::size_t reg_dim = 1 + input_names.size();
  Matrix regressors(total_rows, reg_dim);
  std::vector<double> targets(total_rows);
  std::size_t row = 0;
  for (const auto& set : sets) {
    for (std::size_t r = 0; r < set.regressors.rows(); ++r) {
      for (std::size_t j = 0; j < reg_dim; ++j) {
        regressors(row, j) = set.regressors(r, j);
      }
      targets[row] = set.targets[r];
      ++row;
    }
  }

  const ParamLayout layout{config.hidden_neurons, reg_dim};
  if (total_rows < layout.hidden * layout.reg_dim) {
    std::fprintf(stderr,
                 "warning: narx training has %zu rows for %zu weights; "
                 "results may be poorly determined\n",
                 total_rows, layout.hidden * layout.reg_dim);
  }

  // Initialization: uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer,
  // drawn in packing order.
  Rng rng(config.seed);
  std::vector<double> theta(layout.count());
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(reg_dim));
  const double out_scale =
      1.0 / std::sqrt(static_cast<double>(config.hidden_neurons));
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    for (std::size_t j = 0; j < layout.reg_dim; ++j) {
      theta[layout.input_weight(i, j)] = rng.uniform(-in_scale, in_scale);
    }
  }
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    theta[layout.input_bias(i)] = rng.uniform(-in_scale, in_scale);
  }
  for (std::size_t i = 0; i < layout.hidden; ++i) {
    theta[layout.output_weight(i)] = rng.uniform(-out_scale, out_scale);
  }
  theta[layout.output_bias()] = rng.uniform(-out_scale, out_scale);

  NarxModel model;
  model.config = config;
  model.output_channel = output_name;
  model.input_channels.assign(input_names.begin(), input_names.end());
  model.regressor_mean = stats.mean;
  model.regressor_std = stats.std;
  model.sample_rate = datasets.front().sample_rate;

  std::vector<double> residuals;
  double loss = training_loss(layout, theta, regressors, targets,
                              config.l2_penalty, residuals);
  if (!std::isfinite(loss)) {
    throw DivergenceError("narx training: initial loss is non-finite", 0);
  }
  TrainReport local_report;
  TrainReport& rep = report != nullptr ? *report : local_report;
  rep = TrainReport{};
  rep.accepted_losses.push_back(loss);
  rep.stop_reason = "max_epochs";

  const double inv_rows = 1.0 / static_cast<double>(total_rows);
  double damping = config.lm_initial_damping;
  constexpr double kDampingOverflow = 1e14;
  constexpr double kGradientTol = 1e-10;

  Matrix jac(total_rows, layout.count());
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    fill_jacobian(layout, theta, regressors, jac, true);
    const Matrix jac_t = kernels::transpose(jac);
    Matrix gauss_newton = kernels::matmul(jac_t, jac);  // J^T J
    std::vector<double> gradient = kernels::matvec(jac_t, residuals);
    for (std::size_t k = 0; k < layout.count(); ++k) {
      gradient[k] *= inv_rows;
      if (is_weight_coordinate(layout, k)) {
        gradient[k] += config.l2_penalty * theta[k];
      }
    }
    double grad_norm = 0.0;
    for (double g : gradient) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);
    rep.final_gradient_norm = grad_norm;
    if (grad_norm < kGradientTol) {
      rep.stop_reason = "gradient";
      break;
    }

    for (std::size_t i = 0; i < layout.count(); ++i) {
      for (std::size_t j = 0; j < layout.count(); ++j) {
        gauss_newton(i, j) *= inv_rows;
      }
      if (is_weight_coordinate(layout, i)) {
        gauss_newton(i, i) += config.l2_penalty;
      }
    }

    // Damped normal equations; on rejection raise the damping and retry.
    bool accepted = false;
    while (!accepted) {
      Matrix damped = gauss_newton;
      for (std::size_t i = 0; i < layout.count(); ++i) {
        damped(i, i) += damping;
      }
      bool solvable = true;
      std::vector<double> step;
      try {
        std::vector<double> neg_gradient(gradient.size());
        for (std::size_t i = 0; i < gradient.size(); ++i) {
          neg_gradient[i] = -gradient[i];
        }
        step = cholesky_solve(damped, neg_gradient);
      } catch (const InvalidInputError&) {
        solvable = false;
      }
      if (solvable) {
        std::vector<double> trial(theta);
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += step[i];
        std::vector<double> trial_residuals;
        const double trial_loss =
            training_loss(layout, trial, regressors, targets,
                          config.l2_penalty, trial_residuals);
        if (std::isfinite(trial_loss) && trial_loss < loss) {
          theta = std::move(trial);
          residuals = std::move(trial_residuals);
          loss = trial_loss;
          rep.accepted_losses.push_back(loss);
          damping = std::max(damping / config.lm_damping_factor, 1e-18);
          accepted = true;
        }
      }
      if (!accepted) {
        damping *= config.lm_damping_factor;
        if (damping > kDampingOverflow) break;
      }
    }
    rep.epochs = epoch + 1;
    if (!accepted) {
      rep.stop_reason = "damping_overflow";
      break;
    }
  }

  unpack_params(theta, model);
  return model;
}

std::vector<double> simulate_closed_loop(const NarxModel& model,
                                         std::span<const double> initial_history,
                                         const Matrix& inputs,
                                         std::size_t steps) {
  const std::size_t fb = model.config.feedback_delay_steps;
  const std::size_t d_in = model.config.input_delay_steps;
  const std::size_t lookback = std::max(fb, d_in);
  const std::size_t m = model.input_channels.size();
  if (initial_history.size() < fb) {
    throw DataError("narx simulate: initial history shorter than the feedback delay");
  }
  if (inputs.rows() != m) {
    throw ShapeError("narx simulate: input rows do not match the model");
  }
  if (inputs.cols() != lookback + steps) {
    throw ShapeError("narx simulate: expected " +
                     std::to_string(lookback + steps) +
                     " input columns, got " + std::to_string(inputs.cols()));
  }
  inputs.require_finite("narx simulate inputs");

  // Normalized history of outputs, most recent last.
  std::vector<double> past;
  past.reserve(fb + steps);
  for (std::size_t i = initial_history.size() - fb; i < initial_history.size();
       ++i) {
    past.push_back((initial_history[i] - model.regressor_mean[0]) /
                   model.regressor_std[0]);
  }

  std::vector<double> regressor(model.regressor_dim());
  std::vector<double> out(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    regressor[0] = past[past.size() - fb];
    const std::size_t col = s + lookback - d_in;
    for (std::size_t i = 0; i < m; ++i) {
      regressor[1 + i] = (inputs(i, col) - model.regressor_mean[1 + i]) /
                         model.regressor_std[1 + i];
    }
    const double prediction = forward(model, regressor);
    if (!std::isfinite(prediction)) {
      throw DivergenceError("narx simulate: non-finite prediction at step " +
                                std::to_string(s),
                            s);
    }
    past.push_back(prediction);
    out[s] = prediction * model.regressor_std[0] + model.regressor_mean[0];
  }
  return out;
}

std::vector<double> evaluate_on_dataset(const NarxModel& model,
                                        const TimeSeriesDataset& dataset,
                                        std::size_t* start_index) {
  dataset.validate();
  const std::size_t fb = model.config.feedback_delay_steps;
  const std::size_t lookback =
      std::max(fb, model.config.input_delay_steps);
  if (dataset.length() <= lookback) {
    throw DataError("narx evaluate: dataset shorter than the model delays");
  }
  const std::size_t steps = dataset.length() - lookback;
  if (start_index != nullptr) *start_index = lookback;

  const auto& y = dataset.require(model.output_channel).data;
  std::vector<double> history(y.begin() + static_cast<std::ptrdiff_t>(lookback - fb),
                              y.begin() + static_cast<std::ptrdiff_t>(lookback));

  const std::size_t m = model.input_channels.size();
  Matrix inputs(m, dataset.length());
  for (std::size_t i = 0; i < m; ++i) {
    const auto& data = dataset.require(model.input_channels[i]).data;
    for (std::size_t c = 0; c < dataset.length(); ++c) inputs(i, c) = data[c];
  }
  return simulate_closed_loop(model, history, inputs, steps);
}

void save_model(const NarxModel& model, const std::filesystem::path& path) {
  nlohmann::json header;
  header["type"] = "narx";
  header["output_channel"] = model.output_channel;
  header["input_channels"] = model.input_channels;
  header["sample_rate"] = model.sample_rate;
  header["config"] = {
      {"input_delay_steps", model.config.input_delay_steps},
      {"feedback_delay_steps", model.config.feedback_delay_steps},
      {"hidden_neurons", model.config.hidden_neurons},
      {"l2_penalty", model.config.l2_penalty},
      {"max_epochs", model.config.max_epochs},
      {"seed", model.config.seed},
      {"lm_initial_damping", model.config.lm_initial_damping},
      {"lm_damping_factor", model.config.lm_damping_factor},
  };

  auto row_matrix = [](std::span<const double> v) {
    Matrix m(1, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
    return m;
  };
  std::vector<std::pair<std::string, Matrix>> sections;
  sections.emplace_back("input_weights", model.input_weights);
  sections.emplace_back("input_bias", row_matrix(model.input_bias));
  sections.emplace_back("output_weights", row_matrix(model.output_weights));
  sections.emplace_back("output_bias",
                        row_matrix(std::span(&model.output_bias, 1)));
  sections.emplace_back("regressor_mean", row_matrix(model.regressor_mean));
  sections.emplace_back("regressor_std", row_matrix(model.regressor_std));
  write_container(path, header, sections);
}

NarxModel load_narx_model(const std::filesystem::path& path) {
  const ModelContainer container = read_container(path);
  const auto& header = container.header;
  if (header.value("type", "") != "narx") {
    throw DataError("model file is not a narx model: " + path.string());
  }

  NarxModel model;
  model.output_channel = header.at("output_channel").get<std::string>();
  model.input_channels =
      header.at("input_channels").get<std::vector<std::string>>();
  model.sample_rate = header.at("sample_rate").get<double>();
  const auto& cfg = header.at("config");
  model.config.input_delay_steps = cfg.at("input_delay_steps").get<std::size_t>();
  model.config.feedback_delay_steps =
      cfg.at("feedback_delay_steps").get<std::size_t>();
  model.config.hidden_neurons = cfg.at("hidden_neurons").get<std::size_t>();
  model.config.l2_penalty = cfg.at("l2_penalty").get<double>();
  model.config.max_epochs = cfg.at("max_epochs").get<std::size_t>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.config.lm_initial_damping = cfg.at("lm_initial_damping").get<double>();
  model.config.lm_damping_factor = cfg.at("lm_damping_factor").get<double>();

  auto to_vector = [](const Matrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  model.input_weights = container.section("input_weights");
  model.input_bias = to_vector(container.section("input_bias"));
  model.output_weights = to_vector(container.section("output_weights"));
  model.output_bias = container.section("output_bias")(0, 0);
  model.regressor_mean = to_vector(container.section("regressor_mean"));
  model.regressor_std = to_vector(container.section("regressor_std"));

  const std::size_t h = model.config.hidden_neurons;
  const std::size_t d = model.regressor_dim();
  if (model.input_weights.rows() != h || model.input_weights.cols() != d ||
      model.input_bias.size() != h || model.output_weights.size() != h ||
      model.regressor_mean.size() != d || model.regressor_std.size() != d) {
    throw DataError("narx model file has inconsistent dimensions: " +
                    path.string());
  }
  return model;
}

}  // namespace ksid
