#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spincool/cli/config.hpp"

namespace spincool::cli {

inline constexpr double kBohrMagneton = 9.274e-24; // J/T
inline constexpr double kHbar = 1.0546e-34;        // J s

/// hbar lambda = mu_B dB/dz sqrt(hbar / (2 m omega^3)). Throws
/// spincool::DomainError unless every input is positive.
double estimate_coupling(double dbdz, double mass, double omega);

struct CommandResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> summary;
};

CommandResult cmd_fig1(const RunConfig &config);
CommandResult cmd_fig2(const RunConfig &config);
CommandResult cmd_fig3(const RunConfig &config);
CommandResult cmd_fig6(const RunConfig &config);
CommandResult cmd_collective(const RunConfig &config);
CommandResult cmd_open(const RunConfig &config);
CommandResult cmd_optimize(const RunConfig &config);
CommandResult cmd_estimate_coupling(const RunConfig &config);

/// Dispatches on config.experiment. Protocol commands write the records they
/// have before rethrowing a vanishing-branch error.
CommandResult run_command(const RunConfig &config);

} // namespace spincool::cli
