#pragma once

#include <string>
#include <vector>

#include "modsafe/sim_engine.hpp"

namespace modsafe {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string trajectory_csv(const Trajectory& traj);
std::string summary_csv(const MonteCarloSummary& summary);
std::string runs_csv(const std::vector<RunStats>& runs);
std::string sweep_csv(const std::vector<SweepRecord>& records);

/// Writes text to path, replacing the file. Throws std::runtime_error on
/// I/O failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace modsafe
