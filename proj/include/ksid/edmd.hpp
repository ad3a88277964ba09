// Lifted-linear model identification: fit A, B, C from snapshot matrices,
// one-step prediction, multi-step closed-loop simulation, model persistence.
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ksid/dataset.hpp"
#include "ksid/dictionary.hpp"
#include "ksid/matrix.hpp"

namespace ksid {

struct KoopmanModel {
  Matrix a;  // N_l x N_l
  Matrix b;  // N_l x m
  Matrix c;  // n x N_l, the state selector [I_n | 0]
  DictionarySpec dictionary;
  NormalizationStats stats;
  std::vector<std::string> state_channels;
  std::vector<std::string> input_channels;
  double sample_rate = 0.0;

  std::size_t state_dim() const { return c.rows(); }
  std::size_t lifted_dim() const { return a.rows(); }
  std::size_t input_dim() const { return b.cols(); }
};

struct FitOptions {
  double rank_tolerance = 0.0;  // 0 selects the default SVD cutoff
  double ridge = 0.0;
};

struct FitReport {
  // Frobenius norm of Y_lift - A X_lift - B U over the training snapshots.
  double lifted_residual_norm = 0.0;
  // Frobenius norm of Y - C (A X_lift + B U), the one-step residual of the
  // state block (normalized units).
  double state_residual_norm = 0.0;
  std::size_t effective_rank = 0;
  std::size_t lifted_dim = 0;
  std::size_t snapshot_count = 0;
};

// Lifts the snapshots with `dict` and solves the stacked regression for
// [A, B]. C is fixed to the selector that reads the state block back out.
KoopmanModel fit(const SnapshotMatrices& snapshots, const DictionarySpec& dict,
                 const FitOptions& options = {}, FitReport* report = nullptr);

// z_{l+1} = A z_l + B u_l.
std::vector<double> predict_step(const KoopmanModel& model,
                                 std::span<const double> z,
                                 std::span<const double> u);

struct SimulateOptions {
  // Diagnostic mode: after each step, replace the lifted state by re-lifting
  // its state block. The default (false) is the pure linear rollout, lifting
  // exactly once at the initial condition.
  bool relift_each_step = false;
};

// Rolls the model forward from a physical initial state under the given
// physical input trajectory (m x T). Returns the physical-unit output
// trajectory (n x T); column l is the readout *before* applying input l.
// Throws DivergenceError (with the step index) if the rollout leaves the
// finite range.
Matrix simulate(const KoopmanModel& model, std::span<const double> x0,
                const Matrix& inputs, const SimulateOptions& options = {});

// One-step state-block residual of the model on arbitrary snapshots (built
// with the *model's* normalization): ||Y - C (A X_lift + B U)||_F.
double one_step_state_residual(const KoopmanModel& model,
                               const SnapshotMatrices& snapshots);

void save_model(const KoopmanModel& model, const std::filesystem::path& path);
KoopmanModel load_koopman_model(const std::filesystem::path& path);

}  // namespace ksid
