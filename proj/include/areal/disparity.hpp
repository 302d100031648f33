#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "areal/exact_posterior.hpp"

namespace areal {

/// Per-pair difference probabilities at one epsilon.
struct EpsDiffEstimate {
  std::vector<std::pair<Index, Index>> pairs;
  double epsilon = 0.0;
  Vector v;  // probabilities in [0, 1]
  enum class Method { monte_carlo, quadrature } method = Method::monte_carlo;
  Index mc_draws = 0;                    // 0 for quadrature
  std::optional<double> conditioned_rho;  // set: h_ij(eps; rho); unset: v_ij
};

/// Standardized absolute differences |phi_i - phi_j| / sd for every
/// (pair, draw), stored sorted per pair so any epsilon query costs
/// O(K log N) and reuses one draw set across a whole epsilon scan.
class DiffProbTable {
 public:
  DiffProbTable() = default;
  DiffProbTable(std::vector<std::pair<Index, Index>> pairs, Matrix z,
                std::optional<double> conditioned_rho);

  Index num_pairs() const { return static_cast<Index>(pairs_.size()); }
  Index num_draws() const { return z_.cols(); }
  const std::vector<std::pair<Index, Index>>& pairs() const { return pairs_; }
  std::optional<double> conditioned_rho() const { return conditioned_rho_; }

  /// v_hat_k(eps) for every pair (strict exceedance count / N).
  Vector probabilities(double epsilon) const;

  /// Exceedance probabilities on an ascending grid, all pairs at once.
  Matrix probabilities_on_grid(const Vector& grid,
                               kernels::Exec exec = kernels::default_exec()) const;

  EpsDiffEstimate estimate(double epsilon) const;

 private:
  std::vector<std::pair<Index, Index>> pairs_;
  Matrix z_;  // K x N, each row sorted ascending
  std::optional<double> conditioned_rho_;
};

/// Builds the table from aligned posterior draws. The per-draw standardizer
/// a' Var(phi | y, sigma^2, rho_t) a comes from the spectral identity of the
/// basis (one reduction, any rho).
DiffProbTable build_diff_prob_table(
    const PosteriorDraws& draws,
    const std::vector<std::pair<Index, Index>>& pairs,
    const SpectralBasis& basis, kernels::Exec exec = kernels::default_exec());

/// Monte Carlo epsilon-difference probabilities for neighboring pairs under
/// the flat-beta spectral standardizer built from (car, X).
EpsDiffEstimate estimate_diff_probs(
    const PosteriorDraws& draws,
    const std::vector<std::pair<Index, Index>>& pairs, double epsilon,
    const CarStructure& car, const Matrix& x);

/// h_k(eps; rho) by adaptive quadrature of the conditional band probability
/// against IG(a_n, b_n); contrast is a stacked (p+n) vector on (beta, gamma).
double closed_form_h(const AugmentedPosterior& ap, const Vector& contrast,
                     double epsilon);

/// Standardized posterior mean alpha_k = c' M* m* / sqrt(c' M* c).
double contrast_alpha(const AugmentedPosterior& ap, const Vector& contrast);

/// sum_k v log v + (1-v) log(1-v), with 0 log 0 = 0. Always <= 0.
double entropy_loss(const Vector& v);

struct EpsilonGrid {
  double min = 1e-2;
  double max = 10.0;
  Index points = 200;
  bool log_spaced = true;

  Vector values() const;
};

struct EntropyScan {
  Vector epsilon_grid;
  Vector loss;
  double epsilon_ce = 0.0;
  bool flat = false;  // objective flat over the grid; midpoint returned
};

/// Grid evaluation of the conditional entropy loss followed by
/// golden-section refinement around the grid minimizer (relative epsilon
/// tolerance 1e-3). prob_fn must reuse one draw set across epsilons.
EntropyScan select_epsilon_ce(const std::function<Vector(double)>& prob_fn,
                              const EpsilonGrid& grid);

/// Bayesian false discovery rate at cutoff t (declare v >= t); 0/0 -> 0.
double bayes_fdr(const Vector& v, double t);

/// Bayesian false non-discovery rate at cutoff t; 0/0 -> 0.
double bayes_fnr(const Vector& v, double t);

struct DecisionSet {
  double epsilon = 0.0;
  double delta = 0.0;
  double t_star = 0.0;
  std::vector<std::uint8_t> decisions;
  double fdr_at_cutoff = 0.0;
  double fnr_at_cutoff = 0.0;
  Index declared_count = 0;
  bool no_threshold = false;  // no cutoff meets FDR <= delta; t_star > 1
};

/// Smallest candidate cutoff (a distinct value of v) with FDR <= delta;
/// sentinel above 1 and zero declarations when none qualifies.
DecisionSet select_threshold(const Vector& v, double delta,
                             double epsilon = 0.0);

struct RankStabilityReport {
  std::vector<double> epsilons;
  Matrix kendall_tau;  // per epsilon pair; 1 on the diagonal
  struct Discordance {
    Index eps_a, eps_b;  // indices into epsilons
    Index k, k_prime;    // discordant pair indices
  };
  std::vector<Discordance> discordant;  // capped at 256 entries
  Index discordant_count = 0;
  Index tie_pairs = 0;       // |alpha| ties excluded from comparisons
  bool all_concordant = false;
  bool low_precision = false;  // MC probabilities near zero at small N
};

/// Ranking stability across epsilons. When abs_alpha is given, pairs whose
/// |alpha| differ by less than 1e-10 are treated as ties. mc_draws > 0 marks
/// the estimates as Monte Carlo for the low-precision flag.
RankStabilityReport rank_stability_check(
    const std::function<Vector(double)>& prob_fn,
    const std::vector<double>& epsilons, Index num_pairs,
    const Vector* abs_alpha = nullptr, Index mc_draws = 0);

}  // namespace areal
