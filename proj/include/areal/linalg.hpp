#pragma once

#include "areal/common.hpp"
#include "areal/kernels.hpp"

namespace areal {

/// Output of the one-time simultaneous reduction of a PD form A and a PSD
/// form B: U^T A U = I and U^T B U = diag(D), with A = P diag(Lambda) P^T.
/// Entries of D below the relative zero threshold are clamped to exactly 0
/// so downstream limit formulas can branch on d_i == 0.
struct SpectralBasis {
  Matrix u;       // n x n, invertible
  Vector d;       // descending, clamped at zero_threshold * max(d)
  Matrix p;       // orthogonal eigenvectors of A
  Vector lambda;  // eigenvalues of A, ascending, all positive
  Matrix c;       // internal: orthogonal factor with U = A^{-1/2} C

  /// U^{-1} = C^T A^{1/2} = C^T P diag(sqrt(Lambda)) P^T.
  Matrix inverse_u() const;

  /// Number of entries clamped to zero.
  Index zero_count() const;

  static constexpr double zero_threshold = 1e-8;
};

/// Relative asymmetry tolerance on inputs to the symmetric routines.
inline constexpr double symmetry_tolerance = 1e-10;

/// Eigendecomposition of a symmetric matrix: M = Q diag(values) Q^T,
/// values ascending. Throws numeric_error on asymmetric input.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& m);

/// Simultaneous reduction: A = P Lambda P^T,
/// A^{-1/2} = P Lambda^{-1/2} P^T, A^{-1/2} B A^{-1/2} = C diag(D) C^T,
/// U = A^{-1/2} C. Throws numeric_error on asymmetric input, non-PD A, or
/// B with eigenvalues significantly below zero.
SpectralBasis simul_reduce(const Matrix& a, const Matrix& b);

/// Upper-triangular Cholesky factor R with R^T R = M. Throws numeric_error
/// naming the failing pivot if M is not positive definite.
Matrix cholesky_spd(const Matrix& m,
                    kernels::Exec exec = kernels::default_exec());

enum class SolveSide { forward, backward };

/// forward: solves R^T x = b (R upper triangular); backward: solves R x = b.
/// Throws numeric_error on a zero diagonal entry.
Vector triangular_solve(const Matrix& r, const Vector& b, SolveSide side);

/// Convenience: M^{-1} b through one Cholesky and two triangular solves.
Vector spd_solve(const Matrix& chol_upper, const Vector& b);

/// Dense SPD inverse via Cholesky (one-time costs only).
Matrix spd_inverse(const Matrix& m);

}  // namespace areal
