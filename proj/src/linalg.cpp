#include "areal/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace areal {

namespace {

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw numeric_error(std::string(what) + ": matrix is not square");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > symmetry_tolerance * scale)
    throw numeric_error(std::string(what) + ": matrix is not symmetric");
}

}  // namespace

Matrix SpectralBasis::inverse_u() const {
  return c.transpose() * p * lambda.cwiseSqrt().asDiagonal() * p.transpose();
}

Index SpectralBasis::zero_count() const {
  Index k = 0;
  for (Index i = 0; i < d.size(); ++i)
    if (d[i] == 0.0) ++k;
  return k;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  require_symmetric(m, "symmetric_eigen");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw numeric_error("symmetric_eigen: eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

SpectralBasis simul_reduce(const Matrix& a, const Matrix& b) {
  require_symmetric(a, "simul_reduce(A)");
  require_symmetric(b, "simul_reduce(B)");
  if (a.rows() != b.rows())
    throw numeric_error("simul_reduce: dimension mismatch");

  SpectralBasis out;
  SymmetricEigen ea = symmetric_eigen(a);
  if (ea.values.minCoeff() <= 0.0)
    throw numeric_error("simul_reduce: first form is not positive definite");
  out.p = ea.vectors;
  out.lambda = ea.values;

  const Matrix a_inv_sqrt =
      out.p * out.lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
      out.p.transpose();
  Matrix reduced = a_inv_sqrt * b * a_inv_sqrt;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();

  SymmetricEigen eb = symmetric_eigen(reduced);
  // Descending order for D.
  out.d = eb.values.reverse();
  out.c = eb.vectors.rowwise().reverse();

  const double dmax = out.d.size() > 0 ? out.d.maxCoeff() : 0.0;
  const double clamp = SpectralBasis::zero_threshold * dmax;
  for (Index i = 0; i < out.d.size(); ++i) {
    if (out.d[i] < -1e-6 * std::max(1.0, dmax))
      throw numeric_error(
          "simul_reduce: second form is not positive semidefinite");
    if (out.d[i] < clamp) out.d[i] = 0.0;
  }
  out.u = a_inv_sqrt * out.c;
  return out;
}

Matrix cholesky_spd(const Matrix& m, kernels::Exec exec) {
  require_symmetric(m, "cholesky_spd");
  Matrix r = m;
  const Index pivot = kernels::cholesky_upper_inplace(r, exec);
  if (pivot >= 0)
    throw numeric_error("cholesky_spd: non-positive pivot at index " +
                        std::to_string(pivot));
  r.triangularView<Eigen::StrictlyLower>().setZero();
  return r;
}

Vector triangular_solve(const Matrix& r, const Vector& b, SolveSide side) {
  const Index n = r.rows();
  if (b.size() != n) throw numeric_error("triangular_solve: size mismatch");
  for (Index i = 0; i < n; ++i)
    if (r(i, i) == 0.0)
      throw numeric_error("triangular_solve: zero diagonal at index " +
                          std::to_string(i));
  Vector x(n);
  if (side == SolveSide::forward) {
    // R^T x = b, R upper: forward substitution on rows of R^T.
    for (Index i = 0; i < n; ++i) {
      double s = b[i];
      for (Index k = 0; k < i; ++k) s -= r(k, i) * x[k];
      x[i] = s / r(i, i);
    }
  } else {
    for (Index i = n - 1; i >= 0; --i) {
      double s = b[i];
      for (Index k = i + 1; k < n; ++k) s -= r(i, k) * x[k];
      x[i] = s / r(i, i);
    }
  }
  return x;
}

Vector spd_solve(const Matrix& chol_upper, const Vector& b) {
  return triangular_solve(chol_upper,
                          triangular_solve(chol_upper, b, SolveSide::forward),
                          SolveSide::backward);
}

Matrix spd_inverse(const Matrix& m) {
  const Matrix r = cholesky_spd(m);
  const Index n = m.rows();
  Matrix inv(n, n);
  Vector e = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    inv.col(j) = spd_solve(r, e);
    e[j] = 0.0;
  }
  // Symmetrize roundoff.
  return 0.5 * (inv + inv.transpose());
}

}  // namespace areal
