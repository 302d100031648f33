#pragma once

#include <cstdint>
#include <optional>

#include "areal/exact_posterior.hpp"

namespace areal {

/// Penalized-complexity prior on rho: pi(rho) proportional to
/// lambda exp(-lambda d(rho)), with d the root-KL distance to the
/// unstructured base model.
struct PcPrior {
  double lambda_rho = 1.0;
  double calibration_bound = 0.5;  // the U of P(rho <= U) = a
  double calibration_mass = 0.5;   // the a
  bool degenerate = false;         // d == 0 everywhere (spectrum all ones)
};

/// d(rho) = sqrt(sum_i(rho/lambda_i - log(rho/lambda_i + 1 - rho)) - n rho).
/// lambda are the eigenvalues of the scaled CAR precision.
double pc_distance(double rho, const Vector& lambda);

/// Solves P(rho <= bound) = mass for lambda_rho by bracketed root finding
/// with adaptive quadrature of the prior density.
PcPrior pc_prior_calibrate(const Vector& lambda, double calibration_bound,
                           double calibration_mass);

/// Prior mass P(rho <= bound) under PC(lambda); exposed for round-trips.
double pc_prior_mass(const Vector& lambda, double lambda_rho, double bound);

struct ChainState {
  Vector beta;
  Vector gamma;
  double sigma2 = 1.0;
  double rho = 0.5;
  double r2 = 0.0;  // cached ||y - X beta - gamma||^2
  Index iteration = 0;
  Index accept_count = 0;
};

struct McmcConfig {
  Index iterations = 40000;  // total sweeps, burn-in included
  Index burn_in = 10000;
  Index thin = 1;
  std::uint64_t seed = 0;
  Index chain_id = 0;
  PcPrior pc;
  double a_sigma = 0.1;
  double b_sigma = 0.1;
  std::optional<ChainState> initial;
};

/// Shared read-only precomputation for the Gibbs kernels: the simultaneous
/// reduction and the cached products of the sampling algorithm.
class GibbsWorkspace {
 public:
  GibbsWorkspace(const Matrix& x, const Vector& y, const CarStructure& car);

  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  const Matrix& vphi_inv() const { return vphi_inv_; }
  const SpectralBasis& basis() const { return basis_; }
  const Matrix& m1() const { return m1_; }          // X'X
  const Matrix& chol_m1() const { return r_; }      // chol(X'X)
  const Matrix& m2() const { return m2_; }          // U'X
  const Vector& small_m1() const { return xty_; }   // X'y
  const Vector& small_m2() const { return uty_; }   // U'y
  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }

 private:
  Matrix x_;
  Vector y_;
  Matrix vphi_inv_;
  SpectralBasis basis_;
  Matrix m1_, r_, m2_;
  Vector xty_, uty_;
};

/// One Gibbs draw of beta | y, gamma, sigma^2, rho.
Vector update_beta(const GibbsWorkspace& w, const Vector& gamma, double sigma2,
                   double rho, Rng& rng);

/// One Gibbs draw of gamma | y, beta, sigma^2, rho (diagonalized form).
Vector update_gamma(const GibbsWorkspace& w, const Vector& beta, double sigma2,
                    double rho, Rng& rng);

/// One Gibbs draw of sigma^2 | y, beta, gamma, rho given r^2.
double update_sigma_sq(const GibbsWorkspace& w, double rho, double r2,
                       double a_sigma, double b_sigma, Rng& rng);

struct RhoUpdate {
  double rho;
  bool accepted;
};

/// Metropolis-Hastings update of rho with the truncated inverse-gamma
/// proposal. Proposals outside (0, 1) are redrawn (bounded loop).
RhoUpdate mh_update_rho(const GibbsWorkspace& w, const Vector& gamma,
                        double sigma2, double rho, double r2, double lambda_rho,
                        Rng& rng);

/// Log MH acceptance ratio for a given proposal (exposed for verification).
double mh_log_acceptance(const GibbsWorkspace& w, const Vector& gamma,
                         double sigma2, double rho, double rho_star,
                         double lambda_rho);

/// Full Metropolis-within-Gibbs chain under the flat beta prior and PC rho
/// prior; returns post-burn-in, thinned draws including phi.
PosteriorDraws run_chain(const Matrix& x, const Vector& y,
                         const CarStructure& car, const McmcConfig& config);

}  // namespace areal
