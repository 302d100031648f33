#pragma once

#include <string>
#include <utility>
#include <vector>

#include "areal/disparity.hpp"
#include "areal/exact_posterior.hpp"
#include "areal/graph.hpp"

namespace areal {

/// Locale-independent formatting: 6 significant digits for report files,
/// shortest round trip for draw files.
std::string format_number(double v);
std::string format_full(double v);

/// Observed data keyed by region label; covariates exclude the intercept.
struct Dataset {
  std::vector<std::string> regions;
  Vector y;
  Matrix covariates;  // n x (p - 1)
  std::vector<std::string> covariate_names;
};

void write_data_csv(const std::string& path, const Dataset& data);
Dataset read_data_csv(const std::string& path);

/// Reorders rows to the graph's label order and prepends the intercept.
struct AlignedData {
  Matrix x;  // n x p with leading intercept column
  Vector y;
};
AlignedData align_to_graph(const Dataset& data, const AdjacencyGraph& g);

/// Per-pair ground truth: standardized differences at the generating rho.
struct TruthFile {
  std::vector<std::pair<std::string, std::string>> pairs;
  Vector std_diffs;
};
void write_truth_csv(const std::string& path, const AdjacencyGraph& g,
                     const std::vector<std::pair<Index, Index>>& pairs,
                     const Vector& std_diffs);
TruthFile read_truth_csv(const std::string& path);

void write_draws_csv(const std::string& path,
                     const std::vector<PosteriorDraws>& chains);
PosteriorDraws read_draws_csv(const std::string& path);

/// Compact layout: 16-byte header (magic "ARDW", version, N, dim as
/// little-endian uint32), then column-major little-endian f64 with columns
/// beta..., gamma..., phi..., sigma2, rho; dim = p + 2n + 2.
void write_draws_binary(const std::string& path,
                        const std::vector<PosteriorDraws>& chains);
PosteriorDraws read_draws_binary(const std::string& path, Index p);

struct DisparityFile {
  std::vector<std::pair<std::string, std::string>> pairs;
  Vector v;
  std::vector<std::uint8_t> decisions;
};
/// Rows sorted by v descending, then lexicographically by labels.
void write_disparities_csv(const std::string& path, const AdjacencyGraph& g,
                           const std::vector<std::pair<Index, Index>>& pairs,
                           const Vector& v,
                           const std::vector<std::uint8_t>& decisions);
DisparityFile read_disparities_csv(const std::string& path);

void write_curve_csv(const std::string& path, const Vector& t,
                     const Vector& fdr, const Vector& fnr);
void write_scan_csv(const std::string& path, const EntropyScan& scan);

}  // namespace areal
