#include "areal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "areal/numeric.hpp"
#include "areal/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace areal {

ClassicalTests classical_p_values(const Matrix& x, const Vector& y,
                                  const Matrix& v_y,
                                  const std::vector<Vector>& contrasts) {
  const Index n = x.rows(), p = x.cols();
  if (n <= p)
    throw data_error("classical_p_values: need n > p for the t test");
  const Matrix vy_chol = cholesky_spd(v_y);
  Matrix vinv_x(n, p);
  for (Index j = 0; j < p; ++j) vinv_x.col(j) = spd_solve(vy_chol, x.col(j));
  const Matrix xtvx = x.transpose() * vinv_x;
  const Matrix xtvx_chol = cholesky_spd(xtvx);
  ClassicalTests out;
  out.beta_hat = spd_solve(xtvx_chol, vinv_x.transpose() * y);
  const Vector resid = y - x * out.beta_hat;
  out.sigma2_hat =
      resid.dot(spd_solve(vy_chol, resid)) / static_cast<double>(n - p);
  const double sigma_hat = std::sqrt(out.sigma2_hat);

  const Index k = static_cast<Index>(contrasts.size());
  out.t_stats.resize(k);
  out.p_values.resize(k);
  const Matrix xtvx_inv = spd_inverse(xtvx);
  for (Index i = 0; i < k; ++i) {
    const Vector& c = contrasts[i];
    if (c.size() != p)
      throw data_error("classical_p_values: contrast length mismatch");
    const double scale = std::sqrt(c.dot(xtvx_inv * c));
    const double t = c.dot(out.beta_hat) / (sigma_hat * scale);
    out.t_stats[i] = t;
    out.p_values[i] =
        student_t_two_sided_p(t, static_cast<double>(n - p));
  }
  return out;
}

DicResult dic_exact(const Matrix& x, const Vector& y, const CarStructure& car,
                    const PriorSpec& prior, double rho) {
  if (!prior.flat()) throw config_error("dic_exact: flat beta prior required");
  const AugmentedPosterior ap(x, y, car, rho, prior);
  const Index n = ap.n(), p = ap.p();
  const double a_n = ap.a_n(), b_n = ap.b_n();
  if (!(a_n > 1.0)) throw numeric_error("dic_exact: requires a_n > 1");

  // tr(W M* W') / (1 - rho) = p + tr((I - H) B^{-1})
  //                         = p + sum_j d_j / (d_j + (1-rho)/rho).
  const double ratio = (1.0 - rho) / rho;
  double trace_term = static_cast<double>(p);
  for (Index j = 0; j < n; ++j) {
    const double dj = ap.basis().d[j];
    trace_term += dj / (dj + ratio);
  }

  // Residual at the posterior mean, computed from the vector itself.
  const Vector fitted = x * ap.mean_beta() + ap.mean_gamma();
  const double rss = (y - fitted).squaredNorm();

  const double nn = static_cast<double>(n);
  DicResult out;
  out.rho = rho;
  out.log_lik_at_mean = -0.5 * nn * std::log(2.0 * M_PI * (1.0 - rho)) -
                        0.5 * nn * std::log(b_n / (a_n - 1.0)) -
                        (a_n - 1.0) * rss / (2.0 * b_n * (1.0 - rho));
  out.p_dic = 0.5 * nn * (std::log(a_n - 1.0) - digamma(a_n)) +
              0.5 * trace_term + rss / (2.0 * b_n * (1.0 - rho));
  out.dic = -2.0 * out.log_lik_at_mean + 2.0 * out.p_dic;
  out.p_dic_limit = nn + nn * (std::log(a_n - 1.0) - digamma(a_n));
  return out;
}

Matrix posterior_predictive(const PosteriorDraws& draws, const Matrix& x,
                            std::uint64_t seed) {
  const Index num_draws = draws.size();
  const Index n = x.rows();
  if (draws.beta.cols() != x.cols())
    throw data_error("posterior_predictive: design width mismatch");
  Rng rng = Rng::substream(seed, "predictive");
  Matrix y_rep(num_draws, n);
  for (Index t = 0; t < num_draws; ++t) {
    const Vector mean = x * draws.beta.row(t).transpose() +
                        draws.gamma.row(t).transpose();
    const double sd =
        std::sqrt(draws.sigma2[t] * (1.0 - draws.rho[t]));
    for (Index i = 0; i < n; ++i) y_rep(t, i) = mean[i] + sd * rng.normal();
  }
  return y_rep;
}

Matrix predictive_precision_factor(const Matrix& x, const CarStructure& car,
                                   double rho) {
  const Index n = x.rows();
  const Matrix xtx_inv = spd_inverse(x.transpose() * x);
  const Matrix h = x * xtx_inv * x.transpose();
  Matrix i_h = Matrix::Identity(n, n) - h;
  i_h = 0.5 * (i_h + i_h.transpose()).eval();
  const Matrix b = ((1.0 - rho) / rho) * car.precision + i_h;
  const Matrix inner = spd_inverse(b + i_h);
  Matrix wv1w = 0.5 * h + i_h * inner * i_h;
  Matrix out = Matrix::Identity(n, n) - wv1w;
  return 0.5 * (out + out.transpose());
}

LppdResult waic_lppd_mc(const Matrix& x, const Vector& y,
                        const CarStructure& car, const PriorSpec& prior,
                        double rho, Index mc_draws, std::uint64_t seed) {
  if (!prior.flat())
    throw config_error("waic_lppd_mc: flat beta prior required");
  if (mc_draws < 1) throw config_error("waic_lppd_mc: need draws");
  const AugmentedPosterior ap(x, y, car, rho, prior);
  const Index n = ap.n();

  const Matrix g = predictive_precision_factor(x, car, rho);
  const Matrix g_inv = spd_inverse(g);
  const Vector pred_mean = g_inv * ((Matrix::Identity(n, n) - g) * y);
  const Vector pred_scale = (1.0 - rho) * g_inv.diagonal();

  Rng rng = Rng::substream(seed, "lppd");
  Vector sigma2_draws(mc_draws);
  for (Index s = 0; s < mc_draws; ++s)
    sigma2_draws[s] = rng.inverse_gamma(ap.a_n(), ap.b_n());

  LppdResult out;
  out.mc_draws = mc_draws;
  out.per_observation.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double dev2 = (y[i] - pred_mean[i]) * (y[i] - pred_mean[i]);
    Vector logs(mc_draws);
    for (Index s = 0; s < mc_draws; ++s) {
      const double var = sigma2_draws[s] * pred_scale[i];
      logs[s] = -0.5 * std::log(2.0 * M_PI * var) - 0.5 * dev2 / var;
    }
    const double shift = logs.maxCoeff();
    double acc = 0.0;
    for (Index s = 0; s < mc_draws; ++s) acc += std::exp(logs[s] - shift);
    out.per_observation[i] =
        shift + std::log(acc / static_cast<double>(mc_draws));
  }
  out.lppd = out.per_observation.sum();
  return out;
}

namespace {

struct MoranGearyStats {
  double moran;
  double geary;
};

MoranGearyStats moran_geary_stats(
    const Vector& values, const std::vector<std::pair<Index, Index>>& edges,
    double s0, double denom_ss, double mean) {
  double cross = 0.0, sqdiff = 0.0;
  for (const auto& [i, j] : edges) {
    const double zi = values[i] - mean, zj = values[j] - mean;
    cross += 2.0 * zi * zj;  // symmetric binary weights
    const double d = values[i] - values[j];
    sqdiff += 2.0 * d * d;
  }
  const double n = static_cast<double>(values.size());
  MoranGearyStats out;
  out.moran = n / s0 * cross / denom_ss;
  out.geary = (n - 1.0) / (2.0 * s0) * sqdiff / denom_ss;
  return out;
}

}  // namespace

MoranGeary moran_geary(const Vector& residuals, const AdjacencyGraph& g,
                       Index permutations, std::uint64_t seed,
                       kernels::Exec exec) {
  if (residuals.size() != g.n)
    throw data_error("moran_geary: residual length mismatch");
  if (permutations < 1)
    throw config_error("moran_geary: need at least one permutation");
  const double mean = residuals.mean();
  double ss = 0.0;
  for (Index i = 0; i < g.n; ++i) {
    const double z = residuals[i] - mean;
    ss += z * z;
  }
  if (ss <= 0.0)
    throw data_error("moran_geary: residuals have zero variance");
  const double s0 = 2.0 * static_cast<double>(g.edges.size());

  const MoranGearyStats observed =
      moran_geary_stats(residuals, g.edges, s0, ss, mean);

  // Counter-based per-permutation streams keep parallel batches reproducible.
  const auto permuted_stats = [&](Index perm) {
    Rng rng = Rng::substream(seed, "permutations",
                             static_cast<std::uint64_t>(perm));
    Vector shuffled = residuals;
    for (Index i = g.n - 1; i > 0; --i) {
      const Index j = static_cast<Index>(
          rng.integer(static_cast<std::uint64_t>(i + 1)));
      std::swap(shuffled[i], shuffled[j]);
    }
    return moran_geary_stats(shuffled, g.edges, s0, ss, mean);
  };

  long ge_moran = 0, le_geary = 0;
  if (exec == kernels::Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : ge_moran, le_geary)
    for (Index perm = 0; perm < permutations; ++perm) {
      const MoranGearyStats s = permuted_stats(perm);
      if (s.moran >= observed.moran) ++ge_moran;
      if (s.geary <= observed.geary) ++le_geary;
    }
#else
    exec = kernels::Exec::serial;
#endif
  }
  if (exec == kernels::Exec::serial) {
    for (Index perm = 0; perm < permutations; ++perm) {
      const MoranGearyStats s = permuted_stats(perm);
      if (s.moran >= observed.moran) ++ge_moran;
      if (s.geary <= observed.geary) ++le_geary;
    }
  }

  MoranGeary out;
  out.moran_i = observed.moran;
  out.geary_c = observed.geary;
  out.permutations = permutations;
  out.p_moran = (1.0 + ge_moran) / (static_cast<double>(permutations) + 1.0);
  out.p_geary = (1.0 + le_geary) / (static_cast<double>(permutations) + 1.0);
  return out;
}

ClassificationReport classification_metrics(
    const std::vector<std::uint8_t>& decisions,
    const std::vector<std::uint8_t>& truth, const Vector& prob) {
  const Index k = static_cast<Index>(truth.size());
  if (static_cast<Index>(decisions.size()) != k || prob.size() != k)
    throw data_error("classification_metrics: length mismatch");

  long tp = 0, fp = 0, tn = 0, fn = 0;
  for (Index i = 0; i < k; ++i) {
    if (truth[i] && decisions[i]) ++tp;
    else if (!truth[i] && decisions[i]) ++fp;
    else if (!truth[i] && !decisions[i]) ++tn;
    else ++fn;
  }
  ClassificationReport out;
  const long pos = tp + fn, neg = tn + fp;
  out.sensitivity = pos > 0 ? static_cast<double>(tp) / pos : 0.0;
  out.specificity = neg > 0 ? static_cast<double>(tn) / neg : 0.0;
  out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(k);
  out.true_fdr = (tp + fp) > 0 ? static_cast<double>(fp) / (tp + fp) : 0.0;
  out.true_fnr = (fn + tn) > 0 ? static_cast<double>(fn) / (fn + tn) : 0.0;
  out.roc_undefined = (pos == 0 || neg == 0);

  // ROC by sweeping declared = {prob >= cutoff} over all distinct values,
  // plus sentinels so the curve reaches both corners.
  std::vector<double> cutoffs(prob.data(), prob.data() + k);
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  std::vector<double> sweep;
  sweep.push_back(cutoffs.empty() ? 1.0
                                  : cutoffs.back() + 1.0);  // declare nothing
  for (auto it = cutoffs.rbegin(); it != cutoffs.rend(); ++it)
    sweep.push_back(*it);
  sweep.push_back(0.0);  // declare everything (prob >= 0 always)

  out.roc.clear();
  for (double cut : sweep) {
    long stp = 0, sfp = 0;
    for (Index i = 0; i < k; ++i) {
      if (prob[i] >= cut) {
        if (truth[i]) ++stp;
        else ++sfp;
      }
    }
    const double tpr = pos > 0 ? static_cast<double>(stp) / pos : 0.0;
    const double fpr = neg > 0 ? static_cast<double>(sfp) / neg : 0.0;
    out.roc.emplace_back(fpr, tpr);
  }
  // Deduplicate consecutive points, keep corner-to-corner order.
  out.roc.erase(std::unique(out.roc.begin(), out.roc.end()), out.roc.end());

  double auc = 0.0;
  for (std::size_t i = 1; i < out.roc.size(); ++i) {
    const auto& [x0, y0] = out.roc[i - 1];
    const auto& [x1, y1] = out.roc[i];
    auc += (x1 - x0) * 0.5 * (y0 + y1);
  }
  out.auc = out.roc_undefined ? 0.0 : auc;
  return out;
}

}  // namespace areal
