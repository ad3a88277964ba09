// Dense least-squares machinery: SVD-based Moore-Penrose pseudoinverse and
// the stacked regression that recovers [A, B] from lifted snapshot data.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ksid/matrix.hpp"

namespace ksid {

struct LeastSquaresSolution {
  Matrix coefficients;       // the stacked [A, B], N_l x (N_l + m)
  double residual_norm = 0;  // Frobenius norm of Y_lift - A X_lift - B U
  std::size_t effective_rank = 0;
};

// Moore-Penrose pseudoinverse via SVD. Singular values at or below
// rank_tolerance are treated as zero; rank_tolerance == 0 selects the default
// cutoff max(rows, cols) * machine-epsilon * sigma_max.
Matrix pseudoinverse(const Matrix& m, double rank_tolerance = 0.0);

// Solves min over [A, B] of ||Y_lift - A X_lift - B U||_F via
// [A, B] = Y_lift * pinv([X_lift; U]), the minimum-norm solution.
//
// ridge > 0 replaces the inverted singular values 1/s with s / (s^2 + ridge),
// i.e. Tikhonov regularization of the same stacked problem. Default 0 keeps
// the plain pseudoinverse solution.
LeastSquaresSolution solve_stacked_regression(const Matrix& y_lift,
                                              const Matrix& x_lift,
                                              const Matrix& u,
                                              double rank_tolerance = 0.0,
                                              double ridge = 0.0);

// Solves spd * x = rhs by Cholesky factorization. Throws InvalidInputError
// if the matrix is not (numerically) positive definite.
std::vector<double> cholesky_solve(const Matrix& spd,
                                   std::span<const double> rhs);

}  // namespace ksid
