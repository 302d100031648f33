#include "areal/numeric.hpp"

#include <cmath>
#include <limits>

namespace areal {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double digamma(double x) {
  if (!(x > 0.0)) throw numeric_error("digamma: requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series with Bernoulli coefficients through x^-12.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  double term = inv2;
  series -= term * (1.0 / 12.0);
  term *= inv2;
  series += term * (1.0 / 120.0);
  term *= inv2;
  series -= term * (1.0 / 252.0);
  term *= inv2;
  series += term * (1.0 / 240.0);
  term *= inv2;
  series -= term * (1.0 / 132.0);
  term *= inv2;
  series += term * (691.0 / 32760.0);
  return result + series;
}

namespace {

// Continued fraction for the incomplete beta (Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double nu) {
  const double x = nu / (nu + t * t);
  return incomplete_beta(0.5 * nu, 0.5, x);
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a,
                   double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double golden_section_minimize(const std::function<double(double)>& f,
                               double a, double b, double rel_tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while ((b - a) > rel_tol * (std::abs(a) + std::abs(b)) * 0.5) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

double normal_band_exceedance_under_ig(double alpha, double eps, double a,
                                       double b) {
  if (!(a > 0.0 && b > 0.0))
    throw numeric_error("normal_band_exceedance_under_ig: bad IG parameters");
  // Substitute u = b / sigma^2 so u ~ Gamma(a, 1); integrate the band
  // probability against the gamma density in log space.
  const double lg = std::lgamma(a);
  const auto band = [&](double u) {
    const double sigma = std::sqrt(b / u);
    return normal_cdf(-eps + alpha / sigma) + normal_cdf(-eps - alpha / sigma);
  };
  const auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double log_density = (a - 1.0) * std::log(u) - u - lg;
    return band(u) * std::exp(log_density);
  };
  const double hi = std::max(40.0, a + 40.0 * std::sqrt(a) + 40.0);
  if (a >= 1.0) {
    // Split at the mode to help the recursion lock onto the peak.
    const double mode = std::max(a - 1.0, 1e-8);
    return adaptive_simpson(integrand, 0.0, mode, 5e-10) +
           adaptive_simpson(integrand, mode, hi, 5e-10);
  }
  // Integrable singularity at 0: substitute u = t^{1/a}.
  const auto transformed = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double u = std::pow(t, 1.0 / a);
    return band(u) * std::exp(-u - lg) / a;
  };
  const double hi_t = std::pow(hi, a);
  return adaptive_simpson(transformed, 0.0, std::min(1.0, hi_t), 5e-10) +
         (hi_t > 1.0 ? adaptive_simpson(integrand, 1.0, hi, 5e-10) : 0.0);
}

}  // namespace areal
