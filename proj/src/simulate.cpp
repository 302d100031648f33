#include "areal/simulate.hpp"

#include <cmath>
#include <cstdio>

#include "areal/rng.hpp"

namespace areal {

AdjacencyGraph lattice_graph(Index rows, Index cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw config_error("lattice_graph: need at least two cells");
  std::vector<std::pair<std::string, std::string>> raw;
  char buf[32];
  const auto label = [&](Index r, Index c) {
    std::snprintf(buf, sizeof(buf), "r%03lldc%03lld",
                  static_cast<long long>(r), static_cast<long long>(c));
    return std::string(buf);
  };
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (c + 1 < cols) raw.emplace_back(label(r, c), label(r, c + 1));
      if (r + 1 < rows) raw.emplace_back(label(r, c), label(r + 1, c));
    }
  }
  return build_adjacency(raw).graph;
}

SimulatedDataset generate_dataset(const AdjacencyGraph& g, double alpha,
                                  double c, const Vector& beta_true,
                                  double sigma2_true, double rho_true,
                                  std::uint64_t seed) {
  if (beta_true.size() != 2)
    throw config_error("generate_dataset: beta_true must have 2 entries");
  if (!(sigma2_true >= 0.0) || !(rho_true > 0.0 && rho_true < 1.0))
    throw config_error("generate_dataset: parameters out of range");
  const Index n = g.n;
  const CarStructure car = build_car_precision(g, alpha, c);
  const Matrix vphi = spd_inverse(car.precision);
  const Matrix vphi_chol = cholesky_spd(vphi);

  SimulatedDataset sim;
  sim.seed = seed;
  sim.beta_true = beta_true;
  sim.sigma2_true = sigma2_true;
  sim.rho_true = rho_true;

  Rng cov_rng = Rng::substream(seed, "covariate");
  sim.x.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    sim.x(i, 0) = 1.0;
    sim.x(i, 1) = cov_rng.normal();
  }

  Rng phi_rng = Rng::substream(seed, "phi");
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = phi_rng.normal();
  sim.phi_true = vphi_chol.transpose() * z;

  Rng noise_rng = Rng::substream(seed, "noise");
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = noise_rng.normal();

  const double sigma = std::sqrt(sigma2_true);
  sim.y = sim.x * beta_true + sigma * std::sqrt(rho_true) * sim.phi_true +
          sigma * std::sqrt(1.0 - rho_true) * v;
  return sim;
}

Vector true_standardized_diffs(
    const SimulatedDataset& sim, const CarStructure& car,
    const std::vector<std::pair<Index, Index>>& pairs) {
  const Index n = sim.x.rows();
  const Matrix xtx_inv = spd_inverse(sim.x.transpose() * sim.x);
  Matrix second =
      Matrix::Identity(n, n) - sim.x * xtx_inv * sim.x.transpose();
  second = 0.5 * (second + second.transpose()).eval();
  const SpectralBasis basis = simul_reduce(car.precision, second);

  const double rho = sim.rho_true;
  Vector w(n);
  for (Index m = 0; m < n; ++m)
    w[m] = (1.0 - rho) / (1.0 - rho + rho * basis.d[m]);

  Vector out(static_cast<Index>(pairs.size()));
  for (Index k = 0; k < out.size(); ++k) {
    const auto [i, j] = pairs[k];
    const Vector du = (basis.u.row(i) - basis.u.row(j)).transpose();
    const double sd = std::sqrt(du.array().square().matrix().dot(w));
    out[k] = std::abs(sim.phi_true[i] - sim.phi_true[j]) / sd;
  }
  return out;
}

std::vector<std::uint8_t> true_disparities(
    const SimulatedDataset& sim, const CarStructure& car,
    const std::vector<std::pair<Index, Index>>& pairs, double epsilon) {
  if (!(epsilon > 0.0))
    throw config_error("true_disparities: epsilon must be positive");
  const Vector diffs = true_standardized_diffs(sim, car, pairs);
  std::vector<std::uint8_t> out(pairs.size());
  for (Index k = 0; k < diffs.size(); ++k) out[k] = diffs[k] > epsilon ? 1 : 0;
  return out;
}

}  // namespace areal
