#pragma once

#include <vector>

#include <Eigen/Dense>

namespace irsmec {

/// Physical layout and link-budget constants of one uplink cell: an
/// M-antenna access point, an N-element reflecting surface, and K
/// single-antenna devices, all in a 2-D plane with distances in meters.
///
/// Pathloss for a link of length d is
///   ref_pathloss_db_at_1m + 10 * exponent * log10(d)   [dB]
/// minus the antenna gains of the two endpoints. Device links (to the AP
/// and to the surface) additionally pay penetration_loss_db and carry the
/// device pathloss exponent; the AP-surface link is line of sight and uses
/// its own exponent.
struct SystemGeometry {
  int ap_antennas = 4;    // M
  int users = 4;          // K
  int irs_elements = 30;  // N

  Eigen::Vector2d ap_position{0.0, 0.0};
  Eigen::Vector2d irs_position{50.0, 0.0};
  std::vector<Eigen::Vector2d> user_positions;

  double pathloss_exponent_user = 3.0;
  double pathloss_exponent_ap_irs = 2.0;
  double penetration_loss_db = 10.0;
  double ref_pathloss_db_at_1m = 30.0;

  double antenna_gain_ap_db = 0.0;
  double antenna_gain_user_db = 0.0;
  double antenna_gain_irs_element_db = 5.0;

  double noise_mw = 1e-12;     // receiver noise power sigma^2
  double tx_power_mw = 10.0;   // per-device transmit power q_k

  double ap_irs_distance() const;
  double user_ap_distance(int k) const;
  double user_irs_distance(int k) const;

  /// Throws std::invalid_argument on non-positive counts or powers, a
  /// user count mismatching user_positions, or any zero-length link.
  void validate() const;
};

/// Default experiment layout: AP at the origin, surface 50 m away on the
/// x-axis, devices in a row parallel to the AP-surface line, 5 m apart,
/// centered on the surface at a 2 m perpendicular offset.
///
/// All link constants carry the reference values except the penetration
/// loss, which is calibrated so the default operating point sits in the
/// 2-3 nats/s/Hz feasibility band (see README); pass a different value
/// through the config file to restore the literal 10 dB.
SystemGeometry default_geometry(int ap_antennas, int users, int irs_elements);

/// Penetration loss used by default_geometry.
double calibrated_penetration_loss_db();

}  // namespace irsmec
