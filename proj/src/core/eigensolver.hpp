#pragma once

#include <Eigen/Dense>

namespace xxz::detail {

/// LAPACK dsyevd on a real symmetric matrix (upper triangle referenced).
/// Returns info: 0 on success, > 0 when the solver failed to converge.
int symmetric_eigen(Eigen::MatrixXd& matrix_in_vectors_out, Eigen::VectorXd& values);

/// Compares one BLAS matrix product against a plain loop, once per process.
/// Throws Error(numeric) when the linked BLAS returns wrong results.
void verify_blas();

}  // namespace xxz::detail
