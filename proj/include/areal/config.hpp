#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "areal/common.hpp"

namespace areal {

/// Run configuration, parsed from a single JSON document. Unknown keys are
/// rejected so typos fail fast.
struct RunConfig {
  struct Paths {
    std::string adjacency;   // empty: simulate uses the built-in lattice
    std::string data;
    std::string output_dir = ".";
    std::string draws;       // empty: <output_dir>/draws.<ext>
    std::string truth;       // ground-truth file for diagnose
  } paths;

  struct Model {
    double alpha = 0.99;
    std::optional<double> c;    // unset: "auto" (geometric-mean scaling)
    std::optional<double> rho;  // unset: "pc-prior"
    double pc_bound = 0.5;
    double pc_mass = 2.0 / 3.0;
  } model;

  struct Prior {
    double a_sigma = 0.1;
    double b_sigma = 0.1;
    std::optional<double> ridge;  // unset: flat beta prior
  } prior;

  struct Sampler {
    Index iterations = 40000;
    Index burn_in = 10000;
    Index thin = 1;
    Index draws = 10000;  // exact-sampler draw count
    Index chains = 1;
    std::uint64_t seed = 1;
    std::string format = "csv";  // csv | binary
  } sampler;

  struct Decision {
    std::optional<double> epsilon;  // unset: "entropy"
    double delta = 0.1;
    double grid_min = 1e-2;
    double grid_max = 10.0;
    Index grid_points = 200;
  } decision;

  struct Simulate {
    Index rows = 15;
    Index cols = 15;
    std::vector<double> beta{2.0, 5.0};
    double sigma2 = 4.0;
    double rho = 0.93;
    std::uint64_t seed = 7;
  } simulate;

  struct Diagnose {
    std::vector<double> rho_grid{0.5, 0.9, 0.99, 0.999};
    Index lppd_draws = 2000;
    Index permutations = 0;  // 0: skip the autocorrelation tests
    bool classification = false;
  } diagnose;

  std::string draws_path() const;
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace areal
