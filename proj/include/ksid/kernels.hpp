// Dense compute kernels. Each has an OpenMP-parallel variant (the default,
// used by the library) and a serial reference variant kept for testing and
// benchmarking.
//
// Determinism contract: every output element is accumulated by a single
// thread in a fixed index order, so the parallel variants return results
// bit-identical to the serial references for any thread count.
#pragma once

#include <span>
#include <vector>

#include "ksid/matrix.hpp"

namespace ksid::kernels {

// C = A * B. Parallelized over rows of A; inner loops run in i-k-j order.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);

// y = A * x.
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

Matrix transpose(const Matrix& a);

// [top; bottom], matching column counts.
Matrix vstack(const Matrix& top, const Matrix& bottom);

Matrix subtract(const Matrix& a, const Matrix& b);

}  // namespace ksid::kernels
