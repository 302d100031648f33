#include "areal/exact_posterior.hpp"

#include <cmath>

#include "areal/rng.hpp"

namespace areal {

PriorSpec PriorSpec::flat_beta(Index p, double a, double b) {
  PriorSpec s;
  s.m0_inverse = Matrix::Zero(p, p);
  s.m0 = Vector::Zero(p);
  s.a_sigma = a;
  s.b_sigma = b;
  return s;
}

PriorSpec PriorSpec::ridge(Index p, double ridge_precision, double a,
                           double b) {
  PriorSpec s = flat_beta(p, a, b);
  s.m0_inverse = ridge_precision * Matrix::Identity(p, p);
  return s;
}

AugmentedPosterior::AugmentedPosterior(const Matrix& x, const Vector& y,
                                       const CarStructure& car, double rho,
                                       const PriorSpec& prior)
    : n_(x.rows()), p_(x.cols()), rho_(rho), x_(x), y_(y), prior_(prior) {
  if (!(rho > 0.0 && rho < 1.0))
    throw config_error("augmented_posterior: rho must lie in (0, 1)");
  if (y.size() != n_)
    throw data_error("augmented_posterior: X and y dimensions disagree");
  if (prior.a_sigma <= 0.0 || prior.b_sigma <= 0.0)
    throw config_error("augmented_posterior: IG prior parameters must be > 0");
  if (prior.m0_inverse.rows() != p_ || prior.m0.size() != p_)
    throw config_error("augmented_posterior: prior dimension mismatch");

  vphi_inv_ = car.precision;
  flat_ = prior.flat();

  const Matrix xtx = x_.transpose() * x_;
  {
    // Rank check doubles as the Cholesky cache.
    Matrix probe = xtx;
    const Index pivot = kernels::cholesky_upper_inplace(probe, kernels::Exec::serial);
    if (pivot >= 0)
      throw data_error("augmented_posterior: X is rank deficient (pivot " +
                       std::to_string(pivot) + ")");
    probe.triangularView<Eigen::StrictlyLower>().setZero();
    xtx_chol_ = probe;
  }

  a_ = xtx + (1.0 - rho_) * prior_.m0_inverse;
  a_chol_ = flat_ ? xtx_chol_ : cholesky_spd(a_);

  // Reduced second form: I - X A^{-1} X^T (equals I - H under a flat prior).
  Matrix xa_inv_xt(n_, n_);
  {
    Matrix a_inv_xt(p_, n_);
    for (Index i = 0; i < n_; ++i)
      a_inv_xt.col(i) = spd_solve(a_chol_, x_.row(i).transpose());
    xa_inv_xt = x_ * a_inv_xt;
  }
  Matrix second = Matrix::Identity(n_, n_) - xa_inv_xt;
  second = 0.5 * (second + second.transpose()).eval();
  basis_ = simul_reduce(vphi_inv_, second);
  u_inv_ = basis_.inverse_u();

  const double ratio = (1.0 - rho_) / rho_;
  gamma_var_w_ =
      (basis_.d.array() / (1.0 - rho_) + 1.0 / rho_).inverse().matrix();

  if (!flat_) {
    // Dense B^{-1} with B = ((1-rho)/rho) Vphi^{-1} + I - X A^{-1} X^T.
    const Matrix b = ratio * vphi_inv_ + second;
    b_inv_ = spd_inverse(b);
  }

  // Posterior means (sigma^2-free).
  const Vector xt_y = x_.transpose() * y_;
  if (flat_) {
    // E[gamma] = B^{-1}(I - H) y via the spectral identity.
    const Vector t = u_inv_ * y_;
    Vector scaled(n_);
    for (Index i = 0; i < n_; ++i)
      scaled[i] = basis_.d[i] / (ratio + basis_.d[i]) * t[i];
    mean_gamma_ = basis_.u * scaled;
    mean_beta_ = spd_solve(xtx_chol_, x_.transpose() * (y_ - mean_gamma_));
  } else {
    const Vector a_inv_m0 = spd_solve(a_chol_, prior_.m0);
    const Vector resid = y_ - xa_inv_xt * y_ - (1.0 - rho_) * (x_ * a_inv_m0);
    mean_gamma_ = b_inv_ * resid;
    mean_beta_ = spd_solve(a_chol_, xt_y + (1.0 - rho_) * prior_.m0) -
                 spd_solve(a_chol_, x_.transpose() * mean_gamma_);
  }

  a_n_ = prior_.a_sigma + 0.5 * static_cast<double>(n_);

  if (flat_) {
    // Numerically stable near both endpoints:
    // b_n = b + sum_j v_j^2 d_j / (2 (rho d_j + 1 - rho)), v = U^{-1} e.
    const Vector e = y_ - x_ * spd_solve(xtx_chol_, xt_y);
    const Vector v = u_inv_ * e;
    double acc = 0.0;
    for (Index j = 0; j < n_; ++j) {
      const double dj = basis_.d[j];
      acc += v[j] * v[j] * dj / (2.0 * (rho_ * dj + 1.0 - rho_));
    }
    b_n_ = prior_.b_sigma + acc;
  } else {
    // b_n = b + (y'y/(1-rho) + m0' M0 m0 - m*' M* m*) / 2.
    Vector m_star(p_ + n_);
    m_star.head(p_) = xt_y / (1.0 - rho_) + prior_.m0;
    m_star.tail(n_) = y_ / (1.0 - rho_);
    double prior_quad = 0.0;
    if (!prior_.m0.isZero(0.0)) {
      const Matrix m0_chol = cholesky_spd(prior_.m0_inverse);
      prior_quad = prior_.m0.dot(spd_solve(m0_chol, prior_.m0));
    }
    const double fit = m_star.head(p_).dot(mean_beta_) +
                       m_star.tail(n_).dot(mean_gamma_);
    b_n_ = prior_.b_sigma +
           0.5 * (y_.squaredNorm() / (1.0 - rho_) + prior_quad - fit);
  }
  if (!(b_n_ > 0.0))
    throw numeric_error("augmented_posterior: nonpositive b_n");
}

Vector AugmentedPosterior::mean_stacked() const {
  Vector out(p_ + n_);
  out.head(p_) = mean_beta_;
  out.tail(n_) = mean_gamma_;
  return out;
}

Vector AugmentedPosterior::apply_b_inv(const Vector& v) const {
  if (!flat_) return b_inv_ * v;
  const double ratio = (1.0 - rho_) / rho_;
  Vector t = basis_.u.transpose() * v;
  for (Index i = 0; i < n_; ++i) t[i] /= basis_.d[i] + ratio;
  return basis_.u * t;
}

Vector AugmentedPosterior::apply_mstar(const Vector& contrast) const {
  if (contrast.size() != p_ + n_)
    throw data_error("apply_mstar: contrast length mismatch");
  const Vector cb = contrast.head(p_);
  const Vector cg = contrast.tail(n_);
  const double s = 1.0 - rho_;
  // Blocks at unit sigma^2:
  //   M_bb = s (A^{-1} + A^{-1} X' B^{-1} X A^{-1})
  //   M_bg = -s A^{-1} X' B^{-1}
  //   M_gg = s B^{-1}
  const Vector a_inv_cb = spd_solve(a_chol_, cb);
  const Vector binv_x_acb = apply_b_inv(x_ * a_inv_cb);
  const Vector binv_cg = apply_b_inv(cg);

  Vector out(p_ + n_);
  out.head(p_) =
      s * (a_inv_cb + spd_solve(a_chol_, x_.transpose() * binv_x_acb) -
           spd_solve(a_chol_, x_.transpose() * binv_cg));
  out.tail(n_) = s * (binv_cg - binv_x_acb);
  return out;
}

double AugmentedPosterior::quad_form(const Vector& contrast) const {
  return contrast.dot(apply_mstar(contrast));
}

double AugmentedPosterior::mean_contrast(const Vector& contrast) const {
  if (contrast.size() != p_ + n_)
    throw data_error("mean_contrast: contrast length mismatch");
  return contrast.head(p_).dot(mean_beta_) + contrast.tail(n_).dot(mean_gamma_);
}

AugmentedPosterior augmented_posterior(const Matrix& x, const Vector& y,
                                       const CarStructure& car, double rho,
                                       const PriorSpec& prior) {
  return AugmentedPosterior(x, y, car, rho, prior);
}

ConditionalMoments conditional_moments(const AugmentedPosterior& ap,
                                       double sigma2) {
  const Index n = ap.n(), p = ap.p();
  ConditionalMoments out;
  out.mean_beta = ap.mean_beta();
  out.mean_gamma = ap.mean_gamma();

  // Materialize the unit-sigma^2 blocks column by column through M*.
  Matrix mstar_cols(p + n, p);
  Vector e = Vector::Zero(p + n);
  for (Index j = 0; j < p; ++j) {
    e[j] = 1.0;
    mstar_cols.col(j) = ap.apply_mstar(e);
    e[j] = 0.0;
  }
  out.cov_beta = sigma2 * mstar_cols.topRows(p);
  out.cov_cross = sigma2 * mstar_cols.bottomRows(n).transpose();

  // Gamma block via the basis: sigma^2 U diag(w) U^T.
  const Matrix& u = ap.basis().u;
  out.cov_gamma =
      sigma2 * u * ap.gamma_variance_weights().asDiagonal() * u.transpose();
  return out;
}

Matrix phi_conditional_variance(const AugmentedPosterior& ap) {
  const double r = ap.rho() / (1.0 - ap.rho());
  const Matrix& u = ap.basis().u;
  Vector w = (1.0 + r * ap.basis().d.array()).inverse().matrix();
  return u * w.asDiagonal() * u.transpose();
}

bool PosteriorDraws::constant_rho() const {
  if (rho.size() == 0) return true;
  const double r0 = rho[0];
  for (Index i = 1; i < rho.size(); ++i)
    if (rho[i] != r0) return false;
  return true;
}

PosteriorDraws exact_sample(const AugmentedPosterior& ap, Index n_draws,
                            std::uint64_t seed) {
  if (n_draws < 1) throw config_error("exact_sample: need at least one draw");
  const Index n = ap.n(), p = ap.p();
  Rng rng = Rng::substream(seed, "exact-sampler");

  PosteriorDraws out;
  out.beta.resize(n_draws, p);
  out.gamma.resize(n_draws, n);
  out.phi.resize(n_draws, n);
  out.sigma2.resize(n_draws);
  out.rho = Vector::Constant(n_draws, ap.rho());
  out.meta.seed = seed;
  out.meta.method = "exact";

  const bool flat = ap.flat_path();
  Matrix mstar_chol;  // general path: upper R, R'R = M*
  if (!flat) {
    Matrix mstar(p + n, p + n);
    Vector e = Vector::Zero(p + n);
    for (Index j = 0; j < p + n; ++j) {
      e[j] = 1.0;
      mstar.col(j) = ap.apply_mstar(e);
      e[j] = 0.0;
    }
    mstar = 0.5 * (mstar + mstar.transpose()).eval();
    mstar_chol = cholesky_spd(mstar);
  }

  const Vector gamma_sd =
      ap.gamma_variance_weights().cwiseSqrt();  // unit sigma^2
  const double inv_sqrt_rho = 1.0 / std::sqrt(ap.rho());

  Vector z(n), zp(p), stacked(p + n);
  for (Index t = 0; t < n_draws; ++t) {
    const double sigma2 = rng.inverse_gamma(ap.a_n(), ap.b_n());
    const double sigma = std::sqrt(sigma2);
    out.sigma2[t] = sigma2;
    if (flat) {
      // gamma | y, sigma^2 ~ N(mean_gamma, sigma^2 U diag(w) U');
      for (Index i = 0; i < n; ++i) z[i] = rng.normal();
      const Vector gamma =
          ap.mean_gamma() + sigma * (ap.basis().u * gamma_sd.cwiseProduct(z));
      // beta | gamma, y, sigma^2 ~ N((X'X)^{-1}X'(y - gamma),
      //                              sigma^2 (1-rho)(X'X)^{-1}).
      for (Index i = 0; i < p; ++i) zp[i] = rng.normal();
      const Vector mean_b = spd_solve(
          ap.xtx_chol(), ap.x().transpose() * (ap.y() - gamma));
      const Vector noise_b =
          triangular_solve(ap.xtx_chol(),
                           (sigma * std::sqrt(1.0 - ap.rho())) * zp,
                           SolveSide::backward);
      out.gamma.row(t) = gamma.transpose();
      out.beta.row(t) = (mean_b + noise_b).transpose();
    } else {
      for (Index i = 0; i < p + n; ++i) stacked[i] = rng.normal();
      const Vector draw = ap.mean_stacked() +
                          sigma * (mstar_chol.transpose() * stacked);
      out.beta.row(t) = draw.head(p).transpose();
      out.gamma.row(t) = draw.tail(n).transpose();
    }
    out.phi.row(t) = out.gamma.row(t) * (inv_sqrt_rho / sigma);
  }
  return out;
}

LimitMoments limit_moments(const Matrix& x, const Vector& y,
                           const CarStructure& car, const PriorSpec& prior,
                           RhoLimit which) {
  if (!prior.flat())
    throw config_error("limit_moments: requires the flat beta prior");
  const Index n = x.rows(), p = x.cols();
  const Matrix xtx_chol = cholesky_spd(x.transpose() * x);
  const Vector beta_hat = spd_solve(xtx_chol, x.transpose() * y);
  const Vector e = y - x * beta_hat;
  const Matrix xtx_inv = spd_inverse(x.transpose() * x);

  LimitMoments out;
  out.a_limit = prior.a_sigma + 0.5 * static_cast<double>(n);

  if (which == RhoLimit::rho_to_0) {
    out.mean_beta = beta_hat;
    out.mean_gamma = Vector::Zero(n);
    out.cov_beta_unit = xtx_inv;
    out.cov_gamma_unit = Matrix::Zero(n, n);
    out.cov_cross_unit = Matrix::Zero(p, n);
    out.b_limit = prior.b_sigma + 0.5 * e.squaredNorm();
    return out;
  }

  Matrix h = x * xtx_inv * x.transpose();
  Matrix second = Matrix::Identity(n, n) - h;
  second = 0.5 * (second + second.transpose()).eval();
  const SpectralBasis basis = simul_reduce(car.precision, second);
  const Matrix u_inv = basis.inverse_u();

  Vector dstar(n);
  for (Index i = 0; i < n; ++i) dstar[i] = basis.d[i] > 0.0 ? 1.0 : 0.0;

  const Vector v = u_inv * e;
  out.mean_gamma = basis.u * dstar.cwiseProduct(v);
  out.mean_beta = xtx_inv * (x.transpose() * (y - out.mean_gamma));

  const Matrix vphi = spd_inverse(car.precision);
  const Matrix big_v =
      vphi - basis.u * dstar.asDiagonal() * basis.u.transpose();
  out.cov_gamma_unit = big_v;
  out.cov_beta_unit = xtx_inv * x.transpose() * big_v * x * xtx_inv;
  out.cov_cross_unit = -xtx_inv * x.transpose() * big_v;
  out.b_limit = prior.b_sigma + 0.5 * v.dot(dstar.cwiseProduct(v));
  return out;
}

}  // namespace areal
