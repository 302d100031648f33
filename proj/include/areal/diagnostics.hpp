#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "areal/disparity.hpp"
#include "areal/exact_posterior.hpp"
#include "areal/graph.hpp"

namespace areal {

/// Generalized least squares t tests for K contrasts.
struct ClassicalTests {
  Vector beta_hat;
  double sigma2_hat = 0.0;
  Vector t_stats;
  Vector p_values;  // two-sided, t distribution with n - p dof
};

ClassicalTests classical_p_values(const Matrix& x, const Vector& y,
                                  const Matrix& v_y,
                                  const std::vector<Vector>& contrasts);

struct DicResult {
  double rho = 0.0;
  double log_lik_at_mean = 0.0;
  double p_dic = 0.0;
  double dic = 0.0;
  double p_dic_limit = 0.0;  // n + n (log(a_n - 1) - digamma(a_n))
};

/// Closed-form DIC for the exact model at fixed rho (flat beta prior).
DicResult dic_exact(const Matrix& x, const Vector& y, const CarStructure& car,
                    const PriorSpec& prior, double rho);

/// One replicated response per posterior draw:
/// y_rep ~ N(X beta + gamma, sigma^2 (1 - rho) I).
Matrix posterior_predictive(const PosteriorDraws& draws, const Matrix& x,
                            std::uint64_t seed);

struct LppdResult {
  double lppd = 0.0;
  Vector per_observation;
  Index mc_draws = 0;
};

/// Log pointwise predictive density at fixed rho, flat beta prior. The
/// per-observation density is averaged over IG(a_n, b_n) draws of sigma^2
/// (log-mean-exp), with the predictive law assembled from the block identity
/// W V1^{-1} W' = H/2 + (I-H)(B + I-H)^{-1}(I-H).
LppdResult waic_lppd_mc(const Matrix& x, const Vector& y,
                        const CarStructure& car, const PriorSpec& prior,
                        double rho, Index mc_draws, std::uint64_t seed);

/// Predictive moment matrix I - W V1^{-1} W' (exposed for limit checks).
Matrix predictive_precision_factor(const Matrix& x, const CarStructure& car,
                                   double rho);

struct MoranGeary {
  double moran_i = 0.0;
  double geary_c = 0.0;
  double p_moran = 0.0;  // permutation p, greater-or-equal tail
  double p_geary = 0.0;  // permutation p, less-or-equal tail
  Index permutations = 0;
};

MoranGeary moran_geary(const Vector& residuals, const AdjacencyGraph& g,
                       Index permutations, std::uint64_t seed,
                       kernels::Exec exec = kernels::default_exec());

struct ClassificationReport {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  double true_fdr = 0.0;
  double true_fnr = 0.0;
  std::vector<std::pair<double, double>> roc;  // (fpr, tpr), corner to corner
  double auc = 0.0;
  bool roc_undefined = false;  // truth all-0 or all-1
};

ClassificationReport classification_metrics(
    const std::vector<std::uint8_t>& decisions,
    const std::vector<std::uint8_t>& truth, const Vector& prob);

}  // namespace areal
