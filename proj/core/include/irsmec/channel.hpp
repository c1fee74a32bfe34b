#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "irsmec/geometry.hpp"
#include "irsmec/types.hpp"

namespace irsmec {

/// One realization of every channel in the cell plus the powers needed to
/// evaluate rates: the deterministic IRS-to-AP matrix, the per-user fading
/// vectors, per-user transmit powers and the noise floor.
struct ChannelSet {
  CMatrix irs_to_ap;                 // G, M x N, line of sight
  std::vector<CVector> user_to_irs;  // h_r[k], length N each
  std::vector<CVector> user_to_ap;   // h_d[k], length M each
  RVector tx_power_mw;               // q_k, length K
  double noise_mw = 0.0;             // sigma^2

  int ap_antennas() const { return static_cast<int>(irs_to_ap.rows()); }
  int irs_elements() const { return static_cast<int>(irs_to_ap.cols()); }
  int users() const { return static_cast<int>(user_to_ap.size()); }

  /// Throws std::invalid_argument on inconsistent dimensions or
  /// non-positive powers.
  void validate() const;
};

/// Draws one channel realization: the AP-IRS link is a deterministic
/// rank-one steering-vector outer product scaled by its link budget, the
/// user links are i.i.d. circularly symmetric Gaussian with variance set
/// by their link budgets. Identical geometry and seed give bit-identical
/// output for the same build of the library.
ChannelSet generate_channels(const SystemGeometry& geometry, std::uint64_t seed);

/// Power link budget (linear, applied as the variance of a channel entry)
/// for the three link kinds; exposed so tests can check scaling laws.
double user_ap_link_gain(const SystemGeometry& geometry, int k);
double user_irs_link_gain(const SystemGeometry& geometry, int k);
double ap_irs_link_gain(const SystemGeometry& geometry);

/// Plain-text channel container. Values are written with shortest
/// round-trip formatting, so save followed by load reproduces every
/// complex entry bit-exactly. Throws std::runtime_error naming the
/// offending field on parse errors.
void save_channels(const ChannelSet& channels, const std::filesystem::path& path);
ChannelSet load_channels(const std::filesystem::path& path);

}  // namespace irsmec
