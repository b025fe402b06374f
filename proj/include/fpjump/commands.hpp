#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fpjump/config.hpp"
#include "fpjump/evolve.hpp"
#include "fpjump/model.hpp"

namespace fpjump {

/// Preset or custom problem, with any domain.* overrides applied.
Problem resolve_problem(const RunConfig& cfg);

/// grid.N, or the preset's default node count.
Grid resolve_grid(const RunConfig& cfg, const Problem& p);

EvolveConfig resolve_evolve(const RunConfig& cfg);

/// Initial probability vector from evolve.init sampled on the grid, together
/// with the l1 mass h * sum(rho_0) it was normalised by.
std::vector<double> initial_probability(const RunConfig& cfg, const Grid& g, double* mass = nullptr);

/// Reals with 17 significant digits.
std::string format_real(double v);

void cmd_stationary(const RunConfig& cfg, std::ostream& log);
void cmd_evolve(const RunConfig& cfg, std::ostream& log);
void cmd_gap(const RunConfig& cfg, std::ostream& log);
void cmd_mc(const RunConfig& cfg, std::ostream& log);
void cmd_order(const RunConfig& cfg, std::ostream& log);
void cmd_fig1(const RunConfig& cfg, std::ostream& log);
/// Returns false if any check failed.
bool cmd_selftest(const RunConfig& cfg, std::ostream& log);

const std::vector<std::string>& command_names();

/// Dispatch by name; returns the process exit status for a completed run
/// (0, or 4 when selftest fails). Errors propagate as exceptions.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log);

}  // namespace fpjump
