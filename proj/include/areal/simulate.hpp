#pragma once

#include <cstdint>
#include <vector>

#include "areal/exact_posterior.hpp"
#include "areal/graph.hpp"

namespace areal {

/// Synthetic dataset with its generating truth; regenerable bitwise from
/// (seed, parameters, graph).
struct SimulatedDataset {
  Matrix x;  // n x 2: intercept and one standard-normal covariate
  Vector y;
  Vector phi_true;
  Vector beta_true;
  double sigma2_true = 0.0;
  double rho_true = 0.0;
  std::uint64_t seed = 0;
};

/// Rook-adjacency lattice with zero-padded row/column labels.
AdjacencyGraph lattice_graph(Index rows, Index cols);

/// y = X beta + sigma sqrt(rho) phi + sigma sqrt(1-rho) v with
/// phi ~ N(0, V_phi) drawn through the Cholesky factor of the covariance.
SimulatedDataset generate_dataset(const AdjacencyGraph& g, double alpha,
                                  double c, const Vector& beta_true,
                                  double sigma2_true, double rho_true,
                                  std::uint64_t seed);

/// True standardized differences |phi_i - phi_j| / sd at rho_true, where sd
/// uses the sigma^2-free conditional variance of phi.
Vector true_standardized_diffs(const SimulatedDataset& sim,
                               const CarStructure& car,
                               const std::vector<std::pair<Index, Index>>& pairs);

/// r_ij(eps) evaluated at the true phi and rho.
std::vector<std::uint8_t> true_disparities(
    const SimulatedDataset& sim, const CarStructure& car,
    const std::vector<std::pair<Index, Index>>& pairs, double epsilon);

}  // namespace areal
