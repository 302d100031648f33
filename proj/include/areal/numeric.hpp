#pragma once

#include <functional>

#include "areal/common.hpp"

namespace areal {

/// Standard normal CDF via erfc (accurate in both tails).
double normal_cdf(double x);

/// Digamma by upward recurrence into x >= 10 plus the asymptotic series.
double digamma(double x);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value for a t statistic with nu degrees of freedom.
double student_t_two_sided_p(double t, double nu);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 60);

/// Minimizes f on [a, b] by golden-section search to relative x-tolerance.
double golden_section_minimize(const std::function<double(double)>& f,
                               double a, double b, double rel_tol);

/// Pr(|N(alpha, sigma^2)| > eps * sigma) averaged over sigma^2 ~ IG(a, b):
/// the integral of Phi(-eps + alpha/sigma) + Phi(-eps - alpha/sigma)
/// against the inverse-gamma density, to absolute accuracy < 1e-8.
double normal_band_exceedance_under_ig(double alpha, double eps, double a,
                                       double b);

}  // namespace areal
