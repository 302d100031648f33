#include "areal/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace areal::kernels {

Exec default_exec() {
#ifdef _OPENMP
  return Exec::parallel;
#else
  return Exec::serial;
#endif
}

namespace {

void matvec_rows(const Matrix& a, const Vector& x, Vector& y, Index r0,
                 Index r1) {
  const Index n = a.cols();
  for (Index i = r0; i < r1; ++i) y[i] = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double xj = x[j];
    const double* col = a.col(j).data();
    for (Index i = r0; i < r1; ++i) y[i] += col[i] * xj;
  }
}

}  // namespace

void matvec(const Matrix& a, const Vector& x, Vector& y, Exec exec) {
  const Index m = a.rows();
  y.resize(m);
  if (exec == Exec::serial) {
    matvec_rows(a, x, y, 0, m);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel
  {
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
    const Index chunk = (m + nt - 1) / nt;
    const Index r0 = std::min<Index>(m, tid * chunk);
    const Index r1 = std::min<Index>(m, r0 + chunk);
    if (r0 < r1) matvec_rows(a, x, y, r0, r1);
  }
#else
  matvec_rows(a, x, y, 0, m);
#endif
}

Index cholesky_upper_inplace(Matrix& m, Exec exec) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Index k = 0; k < j; ++k) d -= m(k, j) * m(k, j);
    if (!(d > 0.0) || !std::isfinite(d)) return j;
    const double rjj = std::sqrt(d);
    m(j, j) = rjj;
    const double inv = 1.0 / rjj;
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n - j > 64)
      for (Index i = j + 1; i < n; ++i) {
        double s = m(j, i);
        for (Index k = 0; k < j; ++k) s -= m(k, j) * m(k, i);
        m(j, i) = s * inv;
      }
      continue;
#endif
    }
    for (Index i = j + 1; i < n; ++i) {
      double s = m(j, i);
      for (Index k = 0; k < j; ++k) s -= m(k, j) * m(k, i);
      m(j, i) = s * inv;
    }
  }
  return -1;
}

namespace {

void exceedance_rows(const Matrix& z, const Vector& grid,
                     Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& counts,
                     Index k0, Index k1) {
  const Index num_draws = z.cols();
  const Index g = grid.size();
  const double* gb = grid.data();
  const double* ge = gb + g;
  for (Index k = k0; k < k1; ++k) {
    // Bucket each draw by the first grid point >= z, then suffix-sum:
    // counts[k][j] = #draws strictly above grid[j].
    Eigen::Matrix<long, Eigen::Dynamic, 1> hist =
        Eigen::Matrix<long, Eigen::Dynamic, 1>::Zero(g + 1);
    for (Index t = 0; t < num_draws; ++t) {
      const double v = z(k, t);
      const Index idx = std::lower_bound(gb, ge, v) - gb;
      ++hist[idx];
    }
    long run = 0;
    for (Index j = g - 1; j >= 0; --j) {
      run += hist[j + 1];
      counts(k, j) = run;
    }
  }
}

}  // namespace

void exceedance_counts(const Matrix& z, const Vector& grid,
                       Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& counts,
                       Exec exec) {
  const Index num_pairs = z.rows();
  counts.resize(num_pairs, grid.size());
  if (exec == Exec::serial) {
    exceedance_rows(z, grid, counts, 0, num_pairs);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel
  {
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
    const Index chunk = (num_pairs + nt - 1) / nt;
    const Index k0 = std::min<Index>(num_pairs, tid * chunk);
    const Index k1 = std::min<Index>(num_pairs, k0 + chunk);
    if (k0 < k1) exceedance_rows(z, grid, counts, k0, k1);
  }
#else
  exceedance_rows(z, grid, counts, 0, num_pairs);
#endif
}

}  // namespace areal::kernels
