// Times the OpenMP kernels against their serial references and checks that
// both produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ksid/dictionary.hpp"
#include "ksid/kernels.hpp"
#include "ksid/matrix.hpp"
#include "ksid/narx.hpp"
#include "ksid/rng.hpp"

using namespace ksid;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-1.0, 1.0);
  }
  return m;
}

struct BenchResult {
  double serial_ms;
  double parallel_ms;
  bool bitwise_match;
};

template <typename F>
double time_best_of(F&& body, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(
        best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

void report(const std::string& name, const BenchResult& r) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n",
              name.c_str(), r.serial_ms, r.parallel_ms,
              r.serial_ms / r.parallel_ms,
              r.bitwise_match ? "bitwise match" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; parallel kernels run serially\n");
#endif
  constexpr int kReps = 3;
  Rng rng(12345);

  {
    const Matrix a = random_matrix(128, 24000, rng);
    const Matrix b = random_matrix(24000, 128, rng);
    Matrix serial_out, parallel_out;
    BenchResult r{};
    r.serial_ms =
        time_best_of([&] { serial_out = kernels::matmul_serial(a, b); }, kReps);
    r.parallel_ms =
        time_best_of([&] { parallel_out = kernels::matmul(a, b); }, kReps);
    r.bitwise_match = serial_out == parallel_out;
    report("matmul 128x24000x128", r);
  }

  {
    const DictionarySpec dict = make_rbf_dictionary(
        LiftFamily::Polyharmonic, 100, 2, -1.8, 1.8, /*seed=*/7);
    Matrix states(2, 50000);
    for (std::size_t i = 0; i < states.size(); ++i) {
      states.data()[i] = rng.uniform(-1.8, 1.8);
    }
    Matrix serial_out, parallel_out;
    BenchResult r{};
    r.serial_ms = time_best_of(
        [&] { serial_out = lift_batch_serial(dict, states); }, kReps);
    r.parallel_ms =
        time_best_of([&] { parallel_out = lift_batch(dict, states); }, kReps);
    r.bitwise_match = serial_out == parallel_out;
    report("lift_batch 100 rbf x 50000", r);
  }

  {
    NarxModel model;
    model.config.hidden_neurons = 20;
    model.input_channels.assign(9, "u");
    model.output_channel = "y";
    model.input_weights = random_matrix(20, 10, rng);
    Rng wrng(5);
    model.input_bias.resize(20);
    model.output_weights.resize(20);
    for (std::size_t i = 0; i < 20; ++i) {
      model.input_bias[i] = wrng.uniform(-0.5, 0.5);
      model.output_weights[i] = wrng.uniform(-0.5, 0.5);
    }
    model.output_bias = 0.1;
    model.regressor_mean.assign(10, 0.0);
    model.regressor_std.assign(10, 1.0);

    const Matrix regressors = random_matrix(30000, 10, rng);
    Matrix serial_out, parallel_out;
    BenchResult r{};
    r.serial_ms = time_best_of(
        [&] { serial_out = narx_jacobian_serial(model, regressors); }, kReps);
    r.parallel_ms = time_best_of(
        [&] { parallel_out = narx_jacobian(model, regressors); }, kReps);
    r.bitwise_match = serial_out == parallel_out;
    report("narx_jacobian 30000x241", r);
  }
  return 0;
}
