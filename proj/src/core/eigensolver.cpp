#include "eigensolver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "xxzotoc/error.hpp"

namespace xxz::detail {

int symmetric_eigen(Eigen::MatrixXd& matrix, Eigen::VectorXd& values) {
  const auto n = static_cast<lapack_int>(matrix.rows());
  values.resize(matrix.rows());
  if (n == 0) return 0;
  return LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, matrix.data(), n, values.data());
}

namespace {

double blas_product_error() {
  // Large enough to reach the blocked GEMM kernels.
  constexpr Eigen::Index n = 333;
  Eigen::MatrixXd a(n, n);
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = static_cast<double>((3 * i + 7 * j) % 11) - 5.0;
      b(i, j) = static_cast<double>((5 * i + 2 * j) % 13) - 6.0;
    }
  }
  const Eigen::MatrixXd fast = a * b;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) s += a(i, k) * b(k, j);
      worst = std::max(worst, std::abs(fast(i, j) - s));
    }
  }
  return worst;
}

}  // namespace

void verify_blas() {
  static std::once_flag once;
  static double error = 0.0;
  std::call_once(once, [] { error = blas_product_error(); });
  // Integer-valued inputs: every partial sum is exact in double precision.
  if (error != 0.0) {
    fail(ErrorKind::numeric,
         "the linked BLAS returns wrong matrix products on this CPU (max error " + std::to_string(error) +
             "); select a working kernel, e.g. OPENBLAS_CORETYPE=SkylakeX or OPENBLAS_CORETYPE=Haswell");
  }
}

}  // namespace xxz::detail
