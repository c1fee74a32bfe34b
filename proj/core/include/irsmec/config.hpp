#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "irsmec/econ.hpp"
#include "irsmec/feasibility.hpp"
#include "irsmec/geometry.hpp"
#include "irsmec/sumratio.hpp"

namespace irsmec {

inline constexpr const char* library_version = "0.1.0";

/// Filesystem problem while reading a config or writing results.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything one experiment run needs: the cell layout, the rate-floor
/// sweep, Monte-Carlo size and seeding, device task economics, and solver
/// overrides. Parsed from a plain-text `key = value` file; unset geometry
/// fields fall back to the defaults of default_geometry.
struct ExperimentConfig {
  int ap_antennas = 4;
  int users = 4;
  std::vector<int> n_elements = {30};  // surface sizes swept by feas-prob

  std::optional<double> user_spacing;   // meters between adjacent devices
  std::optional<double> user_offset;    // perpendicular offset of the device row
  std::optional<double> penetration_loss_db;
  std::optional<double> pathloss_exponent_user;
  std::optional<double> pathloss_exponent_ap_irs;
  std::optional<double> noise_mw;
  std::optional<double> tx_power_mw;

  double rate_min = 2.1;  // nats, floor sweep for the feasibility commands
  double rate_max = 2.9;
  double rate_step = 0.1;
  std::optional<double> rate_floor;  // common floor for optimize; default rate_min

  int trials = 50;
  std::uint64_t seed = 1;
  int threads = 0;  // worker pool size; 0 picks the hardware default
  std::string out_dir = "out";

  std::vector<TaskProfile> tasks;         // one per user; empty = default profile for everyone
  std::optional<RVector> cost_scale;      // flat or per-user A_k override
  std::optional<RVector> edge_advantage;  // flat or per-user C_k override

  FeasibilityOptions feasibility;
  SumRatioOptions sumratio;  // its feasibility/qcqp blocks are kept in sync when parsing

  double optimize_floor() const { return rate_floor.value_or(rate_min); }

  /// Throws std::invalid_argument on violated invariants (empty sweep,
  /// trials < 1, mis-sized per-user lists, non-positive tolerances, ...).
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment, lists are whitespace
/// or comma separated, per-user keys accept one value (broadcast) or
/// exactly `users` values. Unknown or duplicate keys throw
/// std::invalid_argument with the offending line number.
ExperimentConfig parse_config_text(const std::string& text);

/// parse_config_text over a file; IoError when unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Effective configuration as re-parseable `key = value` text;
/// parse_config_text(dump_config(c)) reproduces c.
std::string dump_config(const ExperimentConfig& config);

/// Cell layout for one swept surface size, defaults plus the overrides.
SystemGeometry make_geometry(const ExperimentConfig& config, int irs_elements);

/// Per-user economics at a common rate floor: task profiles collapsed by
/// derive_economy, then the flat overrides applied.
OffloadEconomy make_economy(const ExperimentConfig& config, double rate_floor);

/// The swept floors rate_min, rate_min + rate_step, ..., up to rate_max
/// (endpoint included despite rounding in the step arithmetic).
std::vector<double> sweep_floors(const ExperimentConfig& config);

}  // namespace irsmec
