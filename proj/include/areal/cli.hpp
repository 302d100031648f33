#pragma once

#include <iosfwd>
#include <string>

#include "areal/config.hpp"

namespace areal {

/// Subcommand drivers. Each throws config_error / data_error /
/// numeric_error; run_cli maps those to exit codes 2 / 3 / 4.
void cmd_simulate(const RunConfig& cfg, std::ostream& out);
void cmd_fit(const RunConfig& cfg, std::ostream& out);
void cmd_detect(const RunConfig& cfg, std::ostream& out);
void cmd_diagnose(const RunConfig& cfg, std::ostream& out);

int run_cli(int argc, char** argv);

}  // namespace areal
