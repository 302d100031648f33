#pragma once

#include <string>
#include <utility>
#include <vector>

#include "areal/common.hpp"

namespace areal {

/// Symmetric areal adjacency: unique labels in lexicographic order and an
/// undirected edge set over their indices. Immutable after construction.
struct AdjacencyGraph {
  Index n = 0;
  std::vector<std::string> labels;
  std::vector<std::pair<Index, Index>> edges;  // i < j, sorted, deduplicated

  /// Binary adjacency matrix W.
  Matrix adjacency() const;
  /// Diagonal neighbor counts D_W as a vector.
  Vector degrees() const;
};

/// Scaled CAR precision c (D_W - alpha W) with its ingredients.
struct CarStructure {
  double alpha = 0.0;
  double c = 1.0;
  Matrix precision;  // symmetric positive definite for alpha in (0,1)
};

struct EdgeListLoad {
  AdjacencyGraph graph;
  Index duplicate_rows = 0;  // ignored duplicates, reported with a warning
};

/// Reads an undirected edge list ("label_i,label_j" per row, no header).
/// Rejects self-edges, blank labels, and disconnected graphs.
EdgeListLoad load_adjacency(const std::string& path);

/// Builds an AdjacencyGraph from raw label pairs (same validation as the
/// file loader). Duplicate pairs are counted, not errors.
EdgeListLoad build_adjacency(
    const std::vector<std::pair<std::string, std::string>>& raw_edges);

/// c (D_W - alpha W); positive definiteness is checked by factorization.
CarStructure build_car_precision(const AdjacencyGraph& g, double alpha,
                                 double c);

/// Scaling factor making the geometric mean of the marginal variances of
/// the CAR prior equal to one: exp(mean_i log[(D_W - alpha W)^{-1}]_ii).
double compute_scaling_factor(const AdjacencyGraph& g, double alpha);

/// All neighboring pairs (i, j), i < j, in lexicographic index order.
std::vector<std::pair<Index, Index>> neighbor_pairs(const AdjacencyGraph& g);

}  // namespace areal
