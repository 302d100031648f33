#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace areal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy mirrored by the CLI exit codes (2/3/4).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace areal
