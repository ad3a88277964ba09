#include "ksid/edmd.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "ksid/errors.hpp"
#include "ksid/kernels.hpp"
#include "ksid/linalg.hpp"
#include "ksid/model_io.hpp"

namespace ksid {

namespace {

Matrix first_rows(const Matrix& m, std::size_t count) {
  Matrix out(count, m.cols());
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] + b.data()[i];
  }
  return out;
}

void normalize_state(const NormalizationStats& stats,
                     std::span<const double> physical,
                     std::span<double> normalized) {
  for (std::size_t i = 0; i < physical.size(); ++i) {
    normalized[i] = (physical[i] - stats.state_mean[i]) / stats.state_std[i];
  }
}

}  // namespace

KoopmanModel fit(const SnapshotMatrices& snapshots, const DictionarySpec& dict,
                 const FitOptions& options, FitReport* report) {
  dict.validate();
  if (dict.state_dim != snapshots.x.rows()) {
    throw ShapeError("dictionary state_dim " + std::to_string(dict.state_dim) +
                     " does not match snapshot state dimension " +
                     std::to_string(snapshots.x.rows()));
  }
  if (snapshots.stats.state_mean.size() != snapshots.x.rows()) {
    throw ShapeError("snapshot stats do not match state dimension");
  }

  const Matrix x_lift = lift_batch(dict, snapshots.x);
  const Matrix y_lift = lift_batch(dict, snapshots.y);
  const LeastSquaresSolution solution = solve_stacked_regression(
      y_lift, x_lift, snapshots.u, options.rank_tolerance, options.ridge);

  const std::size_t n_lift = dict.lifted_dim();
  const std::size_t n = dict.state_dim;
  const std::size_t m = snapshots.u.rows();

  KoopmanModel model;
  model.a = Matrix(n_lift, n_lift);
  model.b = Matrix(n_lift, m);
  for (std::size_t i = 0; i < n_lift; ++i) {
    for (std::size_t j = 0; j < n_lift; ++j) {
      model.a(i, j) = solution.coefficients(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) {
      model.b(i, j) = solution.coefficients(i, n_lift + j);
    }
  }
  // The state appears verbatim as the first n lifted components, so the
  // readout is the selector [I_n | 0].
  model.c = Matrix(n, n_lift);
  for (std::size_t i = 0; i < n; ++i) model.c(i, i) = 1.0;
  model.dictionary = dict;
  model.stats = snapshots.stats;

  if (report != nullptr) {
    report->lifted_residual_norm = solution.residual_norm;
    report->state_residual_norm = one_step_state_residual(model, snapshots);
    report->effective_rank = solution.effective_rank;
    report->lifted_dim = n_lift;
    report->snapshot_count = snapshots.x.cols();
  }
  return model;
}

std::vector<double> predict_step(const KoopmanModel& model,
                                 std::span<const double> z,
                                 std::span<const double> u) {
  if (z.size() != model.lifted_dim() || u.size() != model.input_dim()) {
    throw ShapeError("predict_step: dimension mismatch");
  }
  std::vector<double> next = kernels::matvec(model.a, z);
  const std::vector<double> forced = kernels::matvec(model.b, u);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += forced[i];
  return next;
}

Matrix simulate(const KoopmanModel& model, std::span<const double> x0,
                const Matrix& inputs, const SimulateOptions& options) {
  const std::size_t n = model.state_dim();
  const std::size_t horizon = inputs.cols();
  if (x0.size() != n) {
    throw ShapeError("simulate: initial state has wrong dimension");
  }
  if (inputs.rows() != model.input_dim()) {
    throw ShapeError("simulate: input rows do not match the model");
  }
  if (horizon < 1) throw ShapeError("simulate: empty input trajectory");
  inputs.require_finite("simulate inputs");
  for (double v : x0) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("simulate: non-finite initial state");
    }
  }

  // Lift once; the rollout stays in the lifted space.
  std::vector<double> x_norm(n);
  normalize_state(model.stats, x0, x_norm);
  std::vector<double> z = lift(model.dictionary, x_norm);

  std::vector<double> u(model.input_dim());
  Matrix trajectory(n, horizon);
  for (std::size_t step = 0; step < horizon; ++step) {
    const std::vector<double> y = kernels::matvec(model.c, z);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(y[i])) {
        throw DivergenceError("simulate: non-finite state at step " +
                                  std::to_string(step),
                              step);
      }
      trajectory(i, step) =
          y[i] * model.stats.state_std[i] + model.stats.state_mean[i];
    }
    if (step + 1 == horizon) break;
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = inputs(i, step);
      if (model.stats.normalizes_inputs()) {
        u[i] = (u[i] - model.stats.input_mean[i]) / model.stats.input_std[i];
      }
    }
    z = predict_step(model, z, u);
    if (options.relift_each_step) {
      const std::span<const double> state_block(z.data(), n);
      z = lift(model.dictionary, state_block);
    }
  }
  return trajectory;
}

double one_step_state_residual(const KoopmanModel& model,
                               const SnapshotMatrices& snapshots) {
  const Matrix x_lift = lift_batch(model.dictionary, snapshots.x);
  const std::size_t n = model.state_dim();
  const Matrix a_state = first_rows(model.a, n);
  const Matrix b_state = first_rows(model.b, n);
  const Matrix fitted = add(kernels::matmul(a_state, x_lift),
                            kernels::matmul(b_state, snapshots.u));
  return kernels::subtract(snapshots.y, fitted).frobenius_norm();
}

void save_model(const KoopmanModel& model, const std::filesystem::path& path) {
  nlohmann::json header;
  header["type"] = "koopman";
  header["state_channels"] = model.state_channels;
  header["input_channels"] = model.input_channels;
  header["sample_rate"] = model.sample_rate;
  header["dictionary"] = {
      {"family", to_string(model.dictionary.family)},
      {"state_dim", model.dictionary.state_dim},
      {"shape_parameter", model.dictionary.shape_parameter},
      {"polynomial_degree", model.dictionary.polynomial_degree},
      {"center_low", model.dictionary.center_low},
      {"center_high", model.dictionary.center_high},
      {"seed", model.dictionary.seed},
  };
  header["normalizes_inputs"] = model.stats.normalizes_inputs();

  auto row_matrix = [](const std::vector<double>& v) {
    Matrix m(1, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
    return m;
  };
  std::vector<std::pair<std::string, Matrix>> sections;
  sections.emplace_back("A", model.a);
  sections.emplace_back("B", model.b);
  sections.emplace_back("C", model.c);
  sections.emplace_back("centers", model.dictionary.centers);
  sections.emplace_back("state_mean", row_matrix(model.stats.state_mean));
  sections.emplace_back("state_std", row_matrix(model.stats.state_std));
  if (model.stats.normalizes_inputs()) {
    sections.emplace_back("input_mean", row_matrix(model.stats.input_mean));
    sections.emplace_back("input_std", row_matrix(model.stats.input_std));
  }
  write_container(path, header, sections);
}

KoopmanModel load_koopman_model(const std::filesystem::path& path) {
  const ModelContainer container = read_container(path);
  const auto& header = container.header;
  if (header.value("type", "") != "koopman") {
    throw DataError("model file is not a koopman model: " + path.string());
  }

  KoopmanModel model;
  model.state_channels =
      header.at("state_channels").get<std::vector<std::string>>();
  model.input_channels =
      header.at("input_channels").get<std::vector<std::string>>();
  model.sample_rate = header.at("sample_rate").get<double>();

  const auto& dict = header.at("dictionary");
  model.dictionary.family =
      lift_family_from_string(dict.at("family").get<std::string>());
  model.dictionary.state_dim = dict.at("state_dim").get<std::size_t>();
  model.dictionary.shape_parameter = dict.at("shape_parameter").get<double>();
  model.dictionary.polynomial_degree =
      dict.at("polynomial_degree").get<std::size_t>();
  model.dictionary.center_low = dict.at("center_low").get<double>();
  model.dictionary.center_high = dict.at("center_high").get<double>();
  model.dictionary.seed = dict.at("seed").get<std::uint64_t>();
  model.dictionary.centers = container.section("centers");

  model.a = container.section("A");
  model.b = container.section("B");
  model.c = container.section("C");

  auto to_vector = [](const Matrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  model.stats.state_mean = to_vector(container.section("state_mean"));
  model.stats.state_std = to_vector(container.section("state_std"));
  if (header.value("normalizes_inputs", false)) {
    model.stats.input_mean = to_vector(container.section("input_mean"));
    model.stats.input_std = to_vector(container.section("input_std"));
  }

  const std::size_t n_lift = model.a.rows();
  if (model.a.cols() != n_lift || model.b.rows() != n_lift ||
      model.c.cols() != n_lift ||
      model.c.rows() != model.dictionary.state_dim ||
      model.dictionary.lifted_dim() != n_lift ||
      model.stats.state_mean.size() != model.c.rows()) {
    throw DataError("model file has inconsistent dimensions: " +
                    path.string());
  }
  return model;
}

}  // namespace ksid
