#include "areal/mcmc.hpp"

#include <cmath>
#include <iterator>

#include "areal/numeric.hpp"
#include "areal/rng.hpp"

namespace areal {

namespace {

constexpr double rho_floor = 1e-12;
constexpr long proposal_redraw_cap = 1000000;

}  // namespace

double pc_distance(double rho, const Vector& lambda) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw numeric_error("pc_distance: rho must lie in [0, 1)");
  double acc = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) {
    const double li = lambda[i];
    if (!(li > 0.0)) throw numeric_error("pc_distance: eigenvalue <= 0");
    const double arg = rho / li + (1.0 - rho);
    if (!(arg > 0.0)) throw numeric_error("pc_distance: log argument <= 0");
    acc += rho / li - std::log(arg);
  }
  acc -= static_cast<double>(lambda.size()) * rho;
  // Roundoff can leave acc barely negative at rho near 0.
  return std::sqrt(std::max(0.0, acc));
}

namespace {

// integral of exp(-lambda d(rho)) over [lo, hi], panelized so sharp mass
// near rho = 0 at large lambda is not missed by the adaptive pass.
double pc_unnormalized_mass(const Vector& spectrum, double lambda_rho,
                            double lo, double hi) {
  const auto f = [&](double r) {
    return std::exp(-lambda_rho * pc_distance(std::min(r, 1.0 - 1e-14), spectrum));
  };
  static const double knots[] = {0.0,  1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3,
                                 1e-2, 0.05, 0.1,  0.25, 0.5,  0.75, 1.0};
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < std::size(knots); ++k) {
    const double a = std::max(lo, knots[k]);
    const double b = std::min(hi, knots[k + 1]);
    if (b > a) total += adaptive_simpson(f, a, b, 1e-12);
  }
  return total;
}

}  // namespace

double pc_prior_mass(const Vector& lambda, double lambda_rho, double bound) {
  const double num = pc_unnormalized_mass(lambda, lambda_rho, 0.0, bound);
  const double den = pc_unnormalized_mass(lambda, lambda_rho, 0.0, 1.0);
  return num / den;
}

PcPrior pc_prior_calibrate(const Vector& lambda, double calibration_bound,
                           double calibration_mass) {
  if (!(calibration_bound > 0.0 && calibration_bound < 1.0) ||
      !(calibration_mass > 0.0 && calibration_mass < 1.0))
    throw config_error("pc_prior_calibrate: bound and mass must lie in (0,1)");

  PcPrior out;
  out.calibration_bound = calibration_bound;
  out.calibration_mass = calibration_mass;

  if (pc_distance(1.0 - 1e-9, lambda) < 1e-12) {
    // d == 0 everywhere: the prior is uniform no matter what lambda is.
    out.degenerate = true;
    out.lambda_rho = 1.0;
    if (std::abs(calibration_bound - calibration_mass) > 1e-4)
      throw numeric_error(
          "pc_prior_calibrate: degenerate (uniform) prior cannot meet the "
          "requested mass");
    return out;
  }

  const auto objective = [&](double lam) {
    return pc_prior_mass(lambda, lam, calibration_bound) - calibration_mass;
  };

  // Geometric bracket expansion around 1, bounded by [1e-6, 1e6].
  double lo = 0.5, hi = 2.0;
  double flo = objective(lo), fhi = objective(hi);
  while (flo * fhi > 0.0) {
    if (lo > 1e-6) {
      lo = std::max(1e-6, lo * 0.25);
      flo = objective(lo);
      if (flo * fhi <= 0.0) break;
    }
    if (hi < 1e6) {
      hi = std::min(1e6, hi * 4.0);
      fhi = objective(hi);
    }
    if (lo <= 1e-6 && hi >= 1e6 && flo * fhi > 0.0)
      throw numeric_error(
          "pc_prior_calibrate: no sign change for lambda in [1e-6, 1e6]");
  }

  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);  // bisect in log space
    const double fmid = objective(mid);
    if (std::abs(fmid) < 1e-7) {
      lo = hi = mid;
      break;
    }
    if (flo * fmid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  out.lambda_rho = std::sqrt(lo * hi);
  return out;
}

GibbsWorkspace::GibbsWorkspace(const Matrix& x, const Vector& y,
                               const CarStructure& car)
    : x_(x), y_(y), vphi_inv_(car.precision) {
  const Index n = x.rows();
  m1_ = x_.transpose() * x_;
  r_ = cholesky_spd(m1_);
  Matrix h = x_ * spd_inverse(m1_) * x_.transpose();
  Matrix second = Matrix::Identity(n, n) - h;
  second = 0.5 * (second + second.transpose()).eval();
  basis_ = simul_reduce(vphi_inv_, second);
  m2_ = basis_.u.transpose() * x_;
  xty_ = x_.transpose() * y_;
  uty_ = basis_.u.transpose() * y_;
}

Vector update_beta(const GibbsWorkspace& w, const Vector& gamma, double sigma2,
                   double rho, Rng& rng) {
  const Index p = w.p();
  Vector z(p);
  const double sd = std::sqrt(sigma2 * (1.0 - rho));
  for (Index i = 0; i < p; ++i) z[i] = sd * rng.normal();
  const Vector rhs = w.small_m1() - w.x().transpose() * gamma;
  const Vector v = triangular_solve(w.chol_m1(), rhs, SolveSide::forward);
  return triangular_solve(w.chol_m1(), v + z, SolveSide::backward);
}

Vector update_gamma(const GibbsWorkspace& w, const Vector& beta, double sigma2,
                    double rho, Rng& rng) {
  const Index n = w.n();
  const Vector& d = w.basis().d;
  const Vector& lam = w.basis().lambda;

  Vector g(n);
  for (Index i = 0; i < n; ++i) g[i] = rho / (1.0 + rho * (d[i] - 1.0));

  Vector vp = w.m1() * beta + w.m2().transpose() * g.cwiseProduct(w.small_m2());
  const Matrix wmat =
      w.m1() + w.m2().transpose() * g.asDiagonal() * w.m2();
  const Matrix wchol = cholesky_spd(wmat);
  vp = triangular_solve(wchol, vp, SolveSide::forward);
  vp = triangular_solve(wchol, vp, SolveSide::backward);

  Vector z(n);
  const double sd = std::sqrt(sigma2);
  for (Index i = 0; i < n; ++i) z[i] = sd * rng.normal();
  Vector noise_scale(n);
  for (Index i = 0; i < n; ++i)
    noise_scale[i] =
        std::sqrt(rho * (1.0 - rho) / (rho + lam[i] * (1.0 - rho)));

  return w.basis().u * g.cwiseProduct(w.small_m2() - w.m2() * vp) +
         w.basis().p * noise_scale.cwiseProduct(z);
}

double update_sigma_sq(const GibbsWorkspace& w, double rho, double r2,
                       double a_sigma, double b_sigma, Rng& rng) {
  const double shape = a_sigma + 0.5 * static_cast<double>(w.n());
  const double rate = b_sigma + r2 / (2.0 * (1.0 - rho));
  return 1.0 / rng.gamma(shape, rate);
}

double mh_log_acceptance(const GibbsWorkspace& w, const Vector& gamma,
                         double sigma2, double rho, double rho_star,
                         double lambda_rho) {
  const double n = static_cast<double>(w.n());
  const double c1 = pc_distance(rho, w.basis().lambda);
  const double c2 = pc_distance(rho_star, w.basis().lambda);
  Vector tmp(w.n());
  kernels::matvec(w.vphi_inv(), gamma, tmp, kernels::default_exec());
  const double quad = gamma.dot(tmp);
  return 0.5 * n * std::log(rho / rho_star) + lambda_rho * (c1 - c2) +
         quad / (2.0 * sigma2) * (1.0 / rho - 1.0 / rho_star);
}

RhoUpdate mh_update_rho(const GibbsWorkspace& w, const Vector& gamma,
                        double sigma2, double rho, double r2, double lambda_rho,
                        Rng& rng) {
  const double shape = 0.5 * static_cast<double>(w.n());
  const double rate = r2 / (2.0 * sigma2);
  double rho_star = 1.0;
  long tries = 0;
  while (rho_star >= 1.0 || rho_star <= 0.0) {
    if (++tries > proposal_redraw_cap)
      throw numeric_error("mh_update_rho: proposal redraw cap exceeded");
    const double tau2 = rng.gamma(shape, rate);
    rho_star = 1.0 - 1.0 / tau2;
  }
  const double log_alpha =
      mh_log_acceptance(w, gamma, sigma2, rho, rho_star, lambda_rho);
  const double u = rng.uniform();
  if (std::log(u) <= log_alpha) {
    rho_star = std::min(1.0 - rho_floor, std::max(rho_floor, rho_star));
    return {rho_star, true};
  }
  return {rho, false};
}

PosteriorDraws run_chain(const Matrix& x, const Vector& y,
                         const CarStructure& car, const McmcConfig& config) {
  if (!(config.iterations > config.burn_in) || config.burn_in < 0)
    throw config_error("run_chain: need iterations > burn_in >= 0");
  if (config.thin < 1) throw config_error("run_chain: thin must be >= 1");

  const GibbsWorkspace w(x, y, car);
  const Index n = w.n(), p = w.p();

  ChainState state;
  if (config.initial) {
    state = *config.initial;
  } else {
    state.beta = spd_solve(w.chol_m1(), w.small_m1());
    state.gamma = Vector::Zero(n);
    const Vector resid = y - x * state.beta;
    state.sigma2 = std::max(1e-8, resid.squaredNorm() /
                                      std::max<Index>(1, n - p));
    state.rho = 0.5;
  }
  state.r2 = (y - x * state.beta - state.gamma).squaredNorm();

  Rng rng = Rng::substream(config.seed, "mcmc-chain",
                           static_cast<std::uint64_t>(config.chain_id));

  const Index kept = (config.iterations - config.burn_in) / config.thin;
  PosteriorDraws out;
  out.beta.resize(kept, p);
  out.gamma.resize(kept, n);
  out.phi.resize(kept, n);
  out.sigma2.resize(kept);
  out.rho.resize(kept);
  out.meta.seed = config.seed;
  out.meta.method = "mcmc";
  out.meta.burn_in = config.burn_in;
  out.meta.thin = config.thin;
  out.meta.chain_id = config.chain_id;

  Index stored = 0;
  for (Index t = 1; t <= config.iterations; ++t) {
    state.beta = update_beta(w, state.gamma, state.sigma2, state.rho, rng);
    state.gamma = update_gamma(w, state.beta, state.sigma2, state.rho, rng);
    state.r2 = (y - x * state.beta - state.gamma).squaredNorm();
    state.sigma2 = update_sigma_sq(w, state.rho, state.r2, config.a_sigma,
                                   config.b_sigma, rng);
    const RhoUpdate ru =
        mh_update_rho(w, state.gamma, state.sigma2, state.rho, state.r2,
                      config.pc.lambda_rho, rng);
    state.rho = ru.rho;
    if (ru.accepted) ++state.accept_count;
    state.iteration = t;

    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 &&
        stored < kept) {
      out.beta.row(stored) = state.beta.transpose();
      out.gamma.row(stored) = state.gamma.transpose();
      out.phi.row(stored) =
          state.gamma.transpose() /
          (std::sqrt(state.sigma2) * std::sqrt(state.rho));
      out.sigma2[stored] = state.sigma2;
      out.rho[stored] = state.rho;
      ++stored;
    }
  }
  out.meta.accept_rate =
      static_cast<double>(state.accept_count) /
      static_cast<double>(config.iterations);
  return out;
}

}  // namespace areal
