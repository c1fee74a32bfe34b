#pragma once

#include <filesystem>
#include <vector>

#include "irsmec/config.hpp"

namespace irsmec {

/// Paths written by one experiment command, manifest included.
struct CommandOutput {
  std::vector<std::filesystem::path> files;
};

/// Writes one channel file per (surface size, trial) into the output
/// directory, named by surface size and generation seed. Reruns with the
/// same config reproduce identical bytes.
CommandOutput cmd_gen_channels(const ExperimentConfig& config);

/// Feasibility-search trace for one realization: every swept floor is run
/// from one common random initial phase vector, emitting rows
/// (floor, iteration, alpha).
CommandOutput cmd_feas_trace(const ExperimentConfig& config);

/// Monte-Carlo feasibility probability over the (surface size, floor,
/// mode) grid, modes none / random / optimized, emitting rows
/// (n, floor, mode, probability).
CommandOutput cmd_feas_prob(const ExperimentConfig& config);

/// Earning maximization per realization: a feasibility search for a
/// starting point, then the sum-of-ratios descent. Emits a per-outer-
/// iteration trace (trial, t, objective, delta, min_rate_slack,
/// inner_iterations) and a summary row per realization including the
/// random-phase baseline.
CommandOutput cmd_optimize(const ExperimentConfig& config);

}  // namespace irsmec
