#include "ksid/kernels.hpp"

#include <cstdint>
#include <string>

#include "ksid/errors.hpp"

namespace ksid::kernels {

namespace {

void check_matmul_shapes(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch: " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " * " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// One output row of C = A * B; k-major so rows of B stream contiguously.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c,
                       std::size_t i) {
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  double* ci = c.data() + i * n;
  for (std::size_t k = 0; k < inner; ++k) {
    const double aik = a(i, k);
    const double* bk = b.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_matmul_shapes(a, b);
  Matrix c(a.rows(), b.cols());
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    matmul_row(a, b, c, static_cast<std::size_t>(i));
  }
  return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  check_matmul_shapes(a, b);
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, c, i);
  return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec shape mismatch: " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " * " +
                     std::to_string(x.size()));
  }
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    const double* ai = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) sum += ai[j] * x[j];
    y[i] = sum;
  }
  return y;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw ShapeError("vstack column mismatch: " + std::to_string(top.cols()) +
                     " vs " + std::to_string(bottom.cols()));
  }
  Matrix out(top.rows() + bottom.rows(), top.cols());
  for (std::size_t i = 0; i < top.rows(); ++i) {
    for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
  }
  for (std::size_t i = 0; i < bottom.rows(); ++i) {
    for (std::size_t j = 0; j < bottom.cols(); ++j) {
      out(top.rows() + i, j) = bottom(i, j);
    }
  }
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("subtract shape mismatch");
  }
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = a.data()[i] - b.data()[i];
  }
  return out;
}

}  // namespace ksid::kernels
