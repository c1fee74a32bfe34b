#include "irsmec/geometry.hpp"

#include <stdexcept>
#include <string>

namespace irsmec {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("geometry: " + what);
}

}  // namespace

double SystemGeometry::ap_irs_distance() const {
  return (irs_position - ap_position).norm();
}

double SystemGeometry::user_ap_distance(int k) const {
  return (user_positions.at(static_cast<size_t>(k)) - ap_position).norm();
}

double SystemGeometry::user_irs_distance(int k) const {
  return (user_positions.at(static_cast<size_t>(k)) - irs_position).norm();
}

void SystemGeometry::validate() const {
  require(ap_antennas > 0, "ap_antennas must be positive");
  require(users > 0, "users must be positive");
  require(irs_elements >= 0, "irs_elements must be non-negative");
  require(static_cast<int>(user_positions.size()) == users,
          "user_positions size must equal users");
  require(noise_mw > 0.0, "noise_mw must be positive");
  require(tx_power_mw > 0.0, "tx_power_mw must be positive");
  require(pathloss_exponent_user > 0.0, "pathloss_exponent_user must be positive");
  require(pathloss_exponent_ap_irs > 0.0, "pathloss_exponent_ap_irs must be positive");
  require(ap_irs_distance() > 0.0, "AP and IRS positions coincide");
  for (int k = 0; k < users; ++k) {
    require(user_ap_distance(k) > 0.0, "user " + std::to_string(k) + " sits on the AP");
    require(user_irs_distance(k) > 0.0, "user " + std::to_string(k) + " sits on the IRS");
  }
}

double calibrated_penetration_loss_db() { return 40.0; }

SystemGeometry default_geometry(int ap_antennas, int users, int irs_elements) {
  SystemGeometry g;
  g.ap_antennas = ap_antennas;
  g.users = users;
  g.irs_elements = irs_elements;
  g.penetration_loss_db = calibrated_penetration_loss_db();
  g.user_positions.reserve(static_cast<size_t>(users));
  const double spacing = 5.0;
  const double offset = 2.0;
  const double row_center = g.irs_position.x();
  for (int k = 0; k < users; ++k) {
    const double x = row_center + spacing * (k - 0.5 * (users - 1));
    g.user_positions.emplace_back(x, g.irs_position.y() + offset);
  }
  return g;
}

}  // namespace irsmec
