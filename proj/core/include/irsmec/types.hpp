#pragma once

#include <complex>

#include <Eigen/Dense>

namespace irsmec {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Per-element IRS reflection coefficients phi, one complex entry per
/// element with |phi_n| <= 1 (amplitude kappa_n, phase theta_n).
using PhaseVector = Eigen::VectorXcd;

/// One receive beamforming vector per user, stored column-wise (M x K).
using ReceiverBank = Eigen::MatrixXcd;

}  // namespace irsmec
