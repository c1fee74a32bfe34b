#include "irsmec/signal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace irsmec {

namespace {

void check_user(const ChannelSet& ch, int k) {
  if (k < 0 || k >= ch.users())
    throw std::invalid_argument("signal: user index " + std::to_string(k) + " out of range");
}

}  // namespace

void validate_phases(const ChannelSet& ch, const PhaseVector& phi) {
  if (phi.size() != ch.irs_elements())
    throw std::invalid_argument("signal: phase vector length " + std::to_string(phi.size()) +
                                " mismatches irs_elements " + std::to_string(ch.irs_elements()));
  for (Eigen::Index n = 0; n < phi.size(); ++n) {
    if (std::abs(phi(n)) > 1.0 + 1e-9)
      throw std::invalid_argument("signal: |phi_" + std::to_string(n) + "| exceeds 1");
  }
}

CVector effective_channel(const ChannelSet& ch, const PhaseVector& phi, int k) {
  check_user(ch, k);
  validate_phases(ch, phi);
  const auto& hr = ch.user_to_irs[static_cast<size_t>(k)];
  return ch.irs_to_ap * phi.cwiseProduct(hr) + ch.user_to_ap[static_cast<size_t>(k)];
}

CMatrix effective_channels(const ChannelSet& ch, const PhaseVector& phi) {
  validate_phases(ch, phi);
  CMatrix h(ch.ap_antennas(), ch.users());
  for (int k = 0; k < ch.users(); ++k) {
    h.col(k) = ch.irs_to_ap * phi.cwiseProduct(ch.user_to_irs[static_cast<size_t>(k)]) +
               ch.user_to_ap[static_cast<size_t>(k)];
  }
  return h;
}

CMatrix cascade_operator(const ChannelSet& ch, int k) {
  check_user(ch, k);
  return ch.irs_to_ap * ch.user_to_irs[static_cast<size_t>(k)].asDiagonal();
}

CMatrix interference_covariance(const ChannelSet& ch, const PhaseVector& phi, int k) {
  check_user(ch, k);
  const CMatrix h = effective_channels(ch, phi);
  CMatrix w = ch.noise_mw * CMatrix::Identity(ch.ap_antennas(), ch.ap_antennas());
  for (int i = 0; i < ch.users(); ++i) {
    if (i == k) continue;
    w.selfadjointView<Eigen::Lower>().rankUpdate(h.col(i), ch.tx_power_mw(i));
  }
  return w.selfadjointView<Eigen::Lower>();
}

CMatrix full_covariance(const ChannelSet& ch, const PhaseVector& phi) {
  const CMatrix h = effective_channels(ch, phi);
  CMatrix w = ch.noise_mw * CMatrix::Identity(ch.ap_antennas(), ch.ap_antennas());
  for (int i = 0; i < ch.users(); ++i) {
    w.selfadjointView<Eigen::Lower>().rankUpdate(h.col(i), ch.tx_power_mw(i));
  }
  return w.selfadjointView<Eigen::Lower>();
}

double sinr(const ChannelSet& ch, const PhaseVector& phi, int k, const CVector& u) {
  check_user(ch, k);
  if (u.size() != ch.ap_antennas())
    throw std::invalid_argument("signal: receiver length mismatches ap_antennas");
  const double un = u.squaredNorm();
  if (!(un > 0.0)) throw std::invalid_argument("signal: zero receiver");
  const CVector hk = effective_channel(ch, phi, k);
  const CMatrix wk = interference_covariance(ch, phi, k);
  const double signal = ch.tx_power_mw(k) * std::norm(u.dot(hk));
  const double denom = (u.adjoint() * wk * u)(0, 0).real();
  return signal / denom;
}

CVector optimal_receiver(const ChannelSet& ch, const PhaseVector& phi, int k) {
  const CVector hk = effective_channel(ch, phi, k);
  const CMatrix wk = interference_covariance(ch, phi, k);
  CVector u = Eigen::LLT<CMatrix>(wk).solve(hk);
  return u / u.norm();
}

double max_sinr(const ChannelSet& ch, const PhaseVector& phi, int k) {
  const CVector hk = effective_channel(ch, phi, k);
  const CMatrix wk = interference_covariance(ch, phi, k);
  return ch.tx_power_mw(k) * Eigen::LLT<CMatrix>(wk).solve(hk).dot(hk).real();
}

double rate(const ChannelSet& ch, const PhaseVector& phi, int k) {
  return std::log1p(max_sinr(ch, phi, k));
}

RVector rates(const ChannelSet& ch, const PhaseVector& phi) {
  RVector r(ch.users());
  const CMatrix h = effective_channels(ch, phi);
  for (int k = 0; k < ch.users(); ++k) {
    CMatrix wk = ch.noise_mw * CMatrix::Identity(ch.ap_antennas(), ch.ap_antennas());
    for (int i = 0; i < ch.users(); ++i) {
      if (i == k) continue;
      wk.selfadjointView<Eigen::Lower>().rankUpdate(h.col(i), ch.tx_power_mw(i));
    }
    const CVector hk = h.col(k);
    const CMatrix wk_full = wk.selfadjointView<Eigen::Lower>();
    const double g =
        ch.tx_power_mw(k) * Eigen::LLT<CMatrix>(wk_full).solve(hk).dot(hk).real();
    r(k) = std::log1p(g);
  }
  return r;
}

double mse(const ChannelSet& ch, const PhaseVector& phi, int k, const CVector& w) {
  check_user(ch, k);
  if (w.size() != ch.ap_antennas())
    throw std::invalid_argument("signal: receiver length mismatches ap_antennas");
  const CMatrix h = effective_channels(ch, phi);
  double out = std::norm(1.0 - std::sqrt(ch.tx_power_mw(k)) * w.dot(h.col(k)));
  for (int j = 0; j < ch.users(); ++j) {
    if (j == k) continue;
    out += ch.tx_power_mw(j) * std::norm(w.dot(h.col(j)));
  }
  out += ch.noise_mw * w.squaredNorm();
  return out;
}

CVector mmse_receiver(const ChannelSet& ch, const PhaseVector& phi, int k) {
  check_user(ch, k);
  const CMatrix cov = full_covariance(ch, phi);
  const CVector hk = effective_channel(ch, phi, k);
  return std::sqrt(ch.tx_power_mw(k)) * Eigen::LLT<CMatrix>(cov).solve(hk);
}

ReceiverBank mmse_receivers(const ChannelSet& ch, const PhaseVector& phi) {
  const CMatrix h = effective_channels(ch, phi);
  CMatrix cov = ch.noise_mw * CMatrix::Identity(ch.ap_antennas(), ch.ap_antennas());
  for (int i = 0; i < ch.users(); ++i) {
    cov.selfadjointView<Eigen::Lower>().rankUpdate(h.col(i), ch.tx_power_mw(i));
  }
  const CMatrix cov_full = cov.selfadjointView<Eigen::Lower>();
  const Eigen::LLT<CMatrix> llt(cov_full);
  ReceiverBank bank(ch.ap_antennas(), ch.users());
  for (int k = 0; k < ch.users(); ++k) {
    bank.col(k) = std::sqrt(ch.tx_power_mw(k)) * llt.solve(h.col(k));
  }
  return bank;
}

double min_mse(const ChannelSet& ch, const PhaseVector& phi, int k) {
  check_user(ch, k);
  const CMatrix cov = full_covariance(ch, phi);
  const CVector hk = effective_channel(ch, phi, k);
  return 1.0 - ch.tx_power_mw(k) * Eigen::LLT<CMatrix>(cov).solve(hk).dot(hk).real();
}

}  // namespace irsmec
