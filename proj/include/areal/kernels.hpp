#pragma once

#include "areal/common.hpp"

namespace areal::kernels {

/// Execution policy for the hot kernels. Every parallel variant uses a
/// fixed per-element accumulation order, so serial and parallel results are
/// bitwise identical and independent of the thread count.
enum class Exec { serial, parallel };

/// Default policy: parallel when OpenMP is compiled in.
Exec default_exec();

/// y = A x. Row-partitioned; per-row accumulation in ascending column order.
void matvec(const Matrix& a, const Vector& x, Vector& y, Exec exec);

/// In-place upper-triangular Cholesky of the upper triangle of m
/// (R^T R = M). Returns the failing pivot index, or -1 on success. The
/// strictly lower triangle is left untouched.
Index cholesky_upper_inplace(Matrix& m, Exec exec);

/// Exceedance counts against an ascending epsilon grid. For each pair row k
/// of `z` (standardized differences, one column per draw), counts[k][g] =
/// #draws with z > grid[g]. Rows are independent; order-stable.
void exceedance_counts(const Matrix& z, const Vector& grid,
                       Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& counts,
                       Exec exec);

}  // namespace areal::kernels
