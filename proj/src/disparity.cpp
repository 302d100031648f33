#include "areal/disparity.hpp"

#include <algorithm>
#include <cmath>

#include "areal/numeric.hpp"

namespace areal {

DiffProbTable::DiffProbTable(std::vector<std::pair<Index, Index>> pairs,
                             Matrix z, std::optional<double> conditioned_rho)
    : pairs_(std::move(pairs)), z_(std::move(z)),
      conditioned_rho_(conditioned_rho) {
  // Rows are strided in the column-major store; sort through a temporary.
  for (Index k = 0; k < z_.rows(); ++k) {
    Vector tmp = z_.row(k);
    std::sort(tmp.data(), tmp.data() + tmp.size());
    z_.row(k) = tmp;
  }
}

Vector DiffProbTable::probabilities(double epsilon) const {
  const Index k = num_pairs();
  const Index n = num_draws();
  Vector out(k);
  for (Index i = 0; i < k; ++i) {
    Vector row = z_.row(i);
    const double* b = row.data();
    const double* e = b + n;
    const Index above = e - std::upper_bound(b, e, epsilon);
    out[i] = static_cast<double>(above) / static_cast<double>(n);
  }
  return out;
}

Matrix DiffProbTable::probabilities_on_grid(const Vector& grid,
                                            kernels::Exec exec) const {
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> counts;
  kernels::exceedance_counts(z_, grid, counts, exec);
  return counts.cast<double>() / static_cast<double>(num_draws());
}

EpsDiffEstimate DiffProbTable::estimate(double epsilon) const {
  EpsDiffEstimate est;
  est.pairs = pairs_;
  est.epsilon = epsilon;
  est.v = probabilities(epsilon);
  est.method = EpsDiffEstimate::Method::monte_carlo;
  est.mc_draws = num_draws();
  est.conditioned_rho = conditioned_rho_;
  return est;
}

DiffProbTable build_diff_prob_table(
    const PosteriorDraws& draws,
    const std::vector<std::pair<Index, Index>>& pairs,
    const SpectralBasis& basis, kernels::Exec exec) {
  const Index num_draws = draws.size();
  const Index num_pairs = static_cast<Index>(pairs.size());
  const Index n = draws.phi.cols();
  if (num_draws == 0) throw data_error("diff_prob_table: no draws");

  // Squared pair contrasts of U rows: E(k, m) = (U(i,m) - U(j,m))^2, so that
  // a' Var(phi | rho) a = sum_m E(k, m) (1 - rho) / (1 - rho + rho d_m).
  Matrix contrast_sq(num_pairs, n);
  for (Index k = 0; k < num_pairs; ++k) {
    const auto [i, j] = pairs[k];
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw data_error("diff_prob_table: pair index out of range");
    contrast_sq.row(k) =
        (basis.u.row(i) - basis.u.row(j)).array().square().matrix();
  }

  Matrix z(num_pairs, num_draws);
  const bool const_rho = draws.constant_rho();
  if (const_rho) {
    const double rho = draws.rho.size() > 0 ? draws.rho[0] : 0.5;
    Vector w(n);
    for (Index m = 0; m < n; ++m)
      w[m] = (1.0 - rho) / (1.0 - rho + rho * basis.d[m]);
    const Vector sd = (contrast_sq * w).cwiseSqrt();
    for (Index k = 0; k < num_pairs; ++k) {
      const auto [i, j] = pairs[k];
      for (Index t = 0; t < num_draws; ++t)
        z(k, t) = std::abs(draws.phi(t, i) - draws.phi(t, j)) / sd[k];
    }
  } else {
    // Per-draw weights; the K x N standardizer matrix is a blocked product
    // contrast_sq (K x n) times W (n x N).
    constexpr Index block = 256;
    Matrix wblock(n, block);
    for (Index t0 = 0; t0 < num_draws; t0 += block) {
      const Index nb = std::min(block, num_draws - t0);
      for (Index b = 0; b < nb; ++b) {
        const double rho = draws.rho[t0 + b];
        for (Index m = 0; m < n; ++m)
          wblock(m, b) = (1.0 - rho) / (1.0 - rho + rho * basis.d[m]);
      }
      const Matrix var_block = contrast_sq * wblock.leftCols(nb);
      for (Index k = 0; k < num_pairs; ++k) {
        const auto [i, j] = pairs[k];
        for (Index b = 0; b < nb; ++b) {
          const Index t = t0 + b;
          z(k, t) = std::abs(draws.phi(t, i) - draws.phi(t, j)) /
                    std::sqrt(var_block(k, b));
        }
      }
    }
  }
  std::optional<double> cond;
  if (const_rho && draws.rho.size() > 0) cond = draws.rho[0];
  return DiffProbTable(pairs, std::move(z), cond);
}

EpsDiffEstimate estimate_diff_probs(
    const PosteriorDraws& draws,
    const std::vector<std::pair<Index, Index>>& pairs, double epsilon,
    const CarStructure& car, const Matrix& x) {
  if (!(epsilon > 0.0))
    throw config_error("estimate_diff_probs: epsilon must be positive");
  const Index n = x.rows();
  const Matrix xtx_inv = spd_inverse(x.transpose() * x);
  Matrix second =
      Matrix::Identity(n, n) - x * xtx_inv * x.transpose();
  second = 0.5 * (second + second.transpose()).eval();
  const SpectralBasis basis = simul_reduce(car.precision, second);
  return build_diff_prob_table(draws, pairs, basis).estimate(epsilon);
}

double contrast_alpha(const AugmentedPosterior& ap, const Vector& contrast) {
  const double denom2 = ap.quad_form(contrast);
  if (!(denom2 > 0.0))
    throw numeric_error("contrast_alpha: contrast has zero posterior scale");
  return ap.mean_contrast(contrast) / std::sqrt(denom2);
}

double closed_form_h(const AugmentedPosterior& ap, const Vector& contrast,
                     double epsilon) {
  if (contrast.isZero(0.0))
    throw data_error("closed_form_h: zero contrast");
  const double alpha = contrast_alpha(ap, contrast);
  return normal_band_exceedance_under_ig(alpha, epsilon, ap.a_n(), ap.b_n());
}

double entropy_loss(const Vector& v) {
  double acc = 0.0;
  for (Index k = 0; k < v.size(); ++k) {
    const double p = v[k];
    if (!(p >= 0.0 && p <= 1.0))
      throw data_error("entropy_loss: probability outside [0, 1]");
    if (p > 0.0) acc += p * std::log(p);
    if (p < 1.0) acc += (1.0 - p) * std::log(1.0 - p);
  }
  return acc;
}

Vector EpsilonGrid::values() const {
  if (points < 2) throw config_error("epsilon grid: need at least 2 points");
  if (!(min > 0.0 && max > min))
    throw config_error("epsilon grid: need 0 < min < max");
  Vector out(points);
  if (log_spaced) {
    const double l0 = std::log(min), l1 = std::log(max);
    for (Index i = 0; i < points; ++i)
      out[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                                 static_cast<double>(points - 1));
  } else {
    for (Index i = 0; i < points; ++i)
      out[i] = min + (max - min) * static_cast<double>(i) /
                         static_cast<double>(points - 1);
  }
  return out;
}

EntropyScan select_epsilon_ce(const std::function<Vector(double)>& prob_fn,
                              const EpsilonGrid& grid) {
  EntropyScan scan;
  scan.epsilon_grid = grid.values();
  const Index g = scan.epsilon_grid.size();
  scan.loss.resize(g);
  Index best = 0;
  for (Index i = 0; i < g; ++i) {
    scan.loss[i] = entropy_loss(prob_fn(scan.epsilon_grid[i]));
    if (scan.loss[i] < scan.loss[best]) best = i;
  }

  const double spread = scan.loss.maxCoeff() - scan.loss.minCoeff();
  if (spread < 1e-12 * std::max(1.0, std::abs(scan.loss.minCoeff()))) {
    scan.flat = true;
    scan.epsilon_ce = scan.epsilon_grid[g / 2];
    return scan;
  }

  const double lo = scan.epsilon_grid[std::max<Index>(0, best - 1)];
  const double hi = scan.epsilon_grid[std::min<Index>(g - 1, best + 1)];
  scan.epsilon_ce = golden_section_minimize(
      [&](double eps) { return entropy_loss(prob_fn(eps)); }, lo, hi, 1e-3);
  return scan;
}

double bayes_fdr(const Vector& v, double t) {
  double num = 0.0;
  Index declared = 0;
  for (Index k = 0; k < v.size(); ++k) {
    if (v[k] >= t) {
      num += 1.0 - v[k];
      ++declared;
    }
  }
  return declared == 0 ? 0.0 : num / static_cast<double>(declared);
}

double bayes_fnr(const Vector& v, double t) {
  double num = 0.0;
  Index undeclared = 0;
  for (Index k = 0; k < v.size(); ++k) {
    if (v[k] < t) {
      num += v[k];
      ++undeclared;
    }
  }
  return undeclared == 0 ? 0.0 : num / static_cast<double>(undeclared);
}

DecisionSet select_threshold(const Vector& v, double delta, double epsilon) {
  if (!(delta > 0.0 && delta < 1.0))
    throw config_error("select_threshold: delta must lie in (0, 1)");
  DecisionSet out;
  out.epsilon = epsilon;
  out.delta = delta;

  std::vector<double> candidates(v.data(), v.data() + v.size());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  // FDR(t) is nonincreasing in t over per-candidate declared sets, so the
  // first qualifying candidate in ascending order is the infimum.
  double t_star = -1.0;
  for (double t : candidates) {
    if (bayes_fdr(v, t) <= delta) {
      t_star = t;
      break;
    }
  }

  out.decisions.assign(v.size(), 0);
  if (t_star < 0.0) {
    out.no_threshold = true;
    out.t_star = std::nextafter(1.0, 2.0);
    out.declared_count = 0;
    out.fdr_at_cutoff = 0.0;
    out.fnr_at_cutoff = bayes_fnr(v, out.t_star);
    return out;
  }
  out.t_star = t_star;
  for (Index k = 0; k < v.size(); ++k)
    if (v[k] >= t_star) {
      out.decisions[k] = 1;
      ++out.declared_count;
    }
  out.fdr_at_cutoff = bayes_fdr(v, t_star);
  out.fnr_at_cutoff = bayes_fnr(v, t_star);
  return out;
}

RankStabilityReport rank_stability_check(
    const std::function<Vector(double)>& prob_fn,
    const std::vector<double>& epsilons, Index num_pairs,
    const Vector* abs_alpha, Index mc_draws) {
  if (epsilons.size() < 2)
    throw config_error("rank_stability_check: need at least two epsilons");
  RankStabilityReport report;
  report.epsilons = epsilons;
  const Index ne = static_cast<Index>(epsilons.size());
  std::vector<Vector> probs;
  probs.reserve(epsilons.size());
  for (double eps : epsilons) {
    Vector v = prob_fn(eps);
    if (v.size() != num_pairs)
      throw data_error("rank_stability_check: prob_fn size mismatch");
    probs.push_back(std::move(v));
  }

  if (mc_draws > 0) {
    const double floor = 10.0 / static_cast<double>(mc_draws);
    for (const Vector& v : probs)
      for (Index k = 0; k < num_pairs; ++k)
        if (v[k] > 0.0 && v[k] < floor) report.low_precision = true;
  }

  report.kendall_tau = Matrix::Identity(ne, ne);
  bool any_discordant = false;
  for (Index a = 0; a < ne; ++a) {
    for (Index b = a + 1; b < ne; ++b) {
      long concordant = 0, discordant = 0;
      for (Index k = 0; k < num_pairs; ++k) {
        for (Index k2 = k + 1; k2 < num_pairs; ++k2) {
          if (abs_alpha != nullptr &&
              std::abs((*abs_alpha)[k] - (*abs_alpha)[k2]) < 1e-10) {
            if (a == 0 && b == 1) ++report.tie_pairs;
            continue;
          }
          const double da = probs[a][k] - probs[a][k2];
          const double db = probs[b][k] - probs[b][k2];
          if (da == 0.0 || db == 0.0) continue;  // rank tie, not a violation
          if (da * db > 0.0) {
            ++concordant;
          } else {
            ++discordant;
            any_discordant = true;
            if (report.discordant.size() < 256)
              report.discordant.push_back({a, b, k, k2});
            ++report.discordant_count;
          }
        }
      }
      const long total = concordant + discordant;
      const double tau =
          total == 0 ? 1.0
                     : static_cast<double>(concordant - discordant) /
                           static_cast<double>(total);
      report.kendall_tau(a, b) = tau;
      report.kendall_tau(b, a) = tau;
    }
  }
  report.all_concordant = !any_discordant;
  return report;
}

}  // namespace areal
