#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "areal/graph.hpp"
#include "areal/linalg.hpp"

namespace areal {

/// Conjugate prior block: N(beta | M0 m0, sigma^2 M0) x IG(sigma^2 | a, b).
/// m0_inverse == 0 encodes the flat beta prior exactly (not a small ridge).
struct PriorSpec {
  Matrix m0_inverse;  // p x p symmetric PSD
  Vector m0;          // p
  double a_sigma = 0.1;
  double b_sigma = 0.1;

  bool flat() const { return m0_inverse.isZero(0.0); }
  static PriorSpec flat_beta(Index p, double a = 0.1, double b = 0.1);
  static PriorSpec ridge(Index p, double ridge_precision, double a = 0.1,
                         double b = 0.1);
};

/// Joint conjugate posterior of (beta, gamma, sigma^2) at fixed rho,
/// expressed through the augmented linear system. The flat-beta path keeps
/// everything in the spectral basis and never materializes the (n+p) system;
/// the general-prior path carries dense covariance blocks.
class AugmentedPosterior {
 public:
  AugmentedPosterior(const Matrix& x, const Vector& y, const CarStructure& car,
                     double rho, const PriorSpec& prior);

  Index n() const { return n_; }
  Index p() const { return p_; }
  double rho() const { return rho_; }
  double a_n() const { return a_n_; }
  double b_n() const { return b_n_; }
  const PriorSpec& prior() const { return prior_; }
  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  const Matrix& vphi_inv() const { return vphi_inv_; }
  const SpectralBasis& basis() const { return basis_; }
  const Matrix& u_inverse() const { return u_inv_; }

  /// Posterior mean of (beta, gamma) given (y, rho); free of sigma^2.
  const Vector& mean_beta() const { return mean_beta_; }
  const Vector& mean_gamma() const { return mean_gamma_; }
  Vector mean_stacked() const;

  /// M* applied to a stacked (p+n) contrast, at unit sigma^2.
  Vector apply_mstar(const Vector& contrast) const;
  /// c^T M* c at unit sigma^2.
  double quad_form(const Vector& contrast) const;
  /// c^T M* m* (the posterior mean of the contrast).
  double mean_contrast(const Vector& contrast) const;

  bool flat_path() const { return flat_; }

  /// chol(X^T X) (upper), cached for the flat path.
  const Matrix& xtx_chol() const { return xtx_chol_; }

  /// Noise scales for gamma | y, sigma^2 at unit sigma^2 in the U basis:
  /// Var(gamma | y, sigma^2, rho) = sigma^2 U diag(w) U^T.
  const Vector& gamma_variance_weights() const { return gamma_var_w_; }

 private:
  Index n_ = 0, p_ = 0;
  double rho_ = 0.0;
  double a_n_ = 0.0, b_n_ = 0.0;
  bool flat_ = true;
  Matrix x_;
  Vector y_;
  PriorSpec prior_;
  Matrix vphi_inv_;
  SpectralBasis basis_;
  Matrix u_inv_;
  Matrix xtx_chol_;   // chol(X^T X), both paths
  Matrix a_;          // X^T X + (1-rho) M0^{-1} (general path)
  Matrix a_chol_;
  Matrix b_inv_;      // dense B^{-1} (general path only)
  Vector mean_beta_;
  Vector mean_gamma_;
  Vector gamma_var_w_;

  Vector apply_b_inv(const Vector& v) const;
};

/// Moments of (beta, gamma) | y, sigma^2, rho.
struct ConditionalMoments {
  Vector mean_beta;
  Vector mean_gamma;
  Matrix cov_beta;
  Matrix cov_gamma;
  Matrix cov_cross;  // Cov(beta, gamma), p x n
};

AugmentedPosterior augmented_posterior(const Matrix& x, const Vector& y,
                                       const CarStructure& car, double rho,
                                       const PriorSpec& prior);

ConditionalMoments conditional_moments(const AugmentedPosterior& ap,
                                       double sigma2);

/// Var(phi | y, sigma^2, rho) = U (I + rho/(1-rho) D)^{-1} U^T; sigma^2-free.
Matrix phi_conditional_variance(const AugmentedPosterior& ap);

/// Aligned posterior sample arrays with provenance.
struct PosteriorDraws {
  Matrix beta;    // N x p
  Matrix gamma;   // N x n
  Matrix phi;     // N x n, phi = gamma / (sigma sqrt(rho)) per draw
  Vector sigma2;  // N
  Vector rho;     // N (constant for exact draws)

  struct Meta {
    std::uint64_t seed = 0;
    std::string method;  // "exact" | "mcmc"
    Index burn_in = 0;
    Index thin = 1;
    Index chain_id = 0;
    double accept_rate = 0.0;  // MH acceptance (mcmc only)
  } meta;

  Index size() const { return sigma2.size(); }
  bool constant_rho() const;
};

/// Exact joint sampling at fixed rho: sigma^2 ~ IG(a_n, b_n), then
/// (beta, gamma) ~ N(M* m*, sigma^2 M*). Reproducible given the seed.
PosteriorDraws exact_sample(const AugmentedPosterior& ap, Index n_draws,
                            std::uint64_t seed);

/// Closed-form limits of the conditional posterior (flat beta prior).
enum class RhoLimit { rho_to_0, rho_to_1 };

struct LimitMoments {
  Vector mean_beta;
  Vector mean_gamma;
  Matrix cov_beta_unit;   // divide of sigma^2
  Matrix cov_gamma_unit;
  Matrix cov_cross_unit;
  double a_limit;
  double b_limit;
};

LimitMoments limit_moments(const Matrix& x, const Vector& y,
                           const CarStructure& car, const PriorSpec& prior,
                           RhoLimit which);

}  // namespace areal
