#include "ksid/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ksid/errors.hpp"
#include "ksid/kernels.hpp"

namespace ksid {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMajor> as_eigen(const Matrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

Matrix from_eigen(const EigenRowMajor& e) {
  Matrix m(static_cast<std::size_t>(e.rows()),
           static_cast<std::size_t>(e.cols()));
  std::copy(e.data(), e.data() + e.size(), m.data());
  return m;
}

// pinv-like map built from the thin SVD of `m`: V * diag(f(s)) * U^T with
// f(s) = 1/s for the plain pseudoinverse and s/(s^2 + ridge) when ridge > 0.
// Singular values at or below the (defaulted) tolerance contribute zero.
Matrix svd_filtered_pinv(const Matrix& m, double rank_tolerance, double ridge,
                         std::size_t* effective_rank) {
  m.require_finite("pseudoinverse input");
  if (m.rows() == 0 || m.cols() == 0) {
    throw ShapeError("pseudoinverse of an empty matrix");
  }
  if (rank_tolerance < 0.0 || ridge < 0.0) {
    throw InvalidInputError("rank_tolerance and ridge must be >= 0");
  }

  Eigen::BDCSVD<EigenRowMajor> svd(as_eigen(m),
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double sigma_max = s.size() > 0 ? s(0) : 0.0;
  const double tol =
      rank_tolerance > 0.0
          ? rank_tolerance
          : static_cast<double>(std::max(m.rows(), m.cols())) *
                std::numeric_limits<double>::epsilon() * sigma_max;

  Eigen::VectorXd factors(s.size());
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= tol || s(i) == 0.0) {
      factors(i) = 0.0;
    } else {
      factors(i) = ridge > 0.0 ? s(i) / (s(i) * s(i) + ridge) : 1.0 / s(i);
      ++rank;
    }
  }
  if (effective_rank != nullptr) *effective_rank = rank;

  EigenRowMajor pinv =
      svd.matrixV() * factors.asDiagonal() * svd.matrixU().transpose();
  return from_eigen(pinv);
}

}  // namespace

Matrix pseudoinverse(const Matrix& m, double rank_tolerance) {
  return svd_filtered_pinv(m, rank_tolerance, 0.0, nullptr);
}

LeastSquaresSolution solve_stacked_regression(const Matrix& y_lift,
                                              const Matrix& x_lift,
                                              const Matrix& u,
                                              double rank_tolerance,
                                              double ridge) {
  if (x_lift.cols() != y_lift.cols() || u.cols() != y_lift.cols()) {
    throw ShapeError(
        "snapshot column counts differ: Y_lift " +
        std::to_string(y_lift.cols()) + ", X_lift " +
        std::to_string(x_lift.cols()) + ", U " + std::to_string(u.cols()));
  }
  if (x_lift.rows() != y_lift.rows()) {
    throw ShapeError("X_lift and Y_lift row counts differ");
  }
  y_lift.require_finite("Y_lift");
  x_lift.require_finite("X_lift");
  u.require_finite("U");

  const Matrix regressors = kernels::vstack(x_lift, u);
  LeastSquaresSolution solution;
  const Matrix pinv = svd_filtered_pinv(regressors, rank_tolerance, ridge,
                                        &solution.effective_rank);
  solution.coefficients = kernels::matmul(y_lift, pinv);
  const Matrix fitted = kernels::matmul(solution.coefficients, regressors);
  solution.residual_norm = kernels::subtract(y_lift, fitted).frobenius_norm();
  return solution;
}

std::vector<double> cholesky_solve(const Matrix& spd,
                                   std::span<const double> rhs) {
  const std::size_t n = spd.rows();
  if (spd.cols() != n || rhs.size() != n) {
    throw ShapeError("cholesky_solve expects square matrix matching rhs");
  }
  // Lower-triangular factor, in place on a copy.
  Matrix l(spd);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = l(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw InvalidInputError("matrix not positive definite in cholesky_solve");
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = l(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / ljj;
    }
  }
  // Forward then backward substitution.
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    double sum = x[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * x[k];
    x[i] = sum / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * x[k];
    x[ii] = sum / l(ii, ii);
  }
  return x;
}

}  // namespace ksid
