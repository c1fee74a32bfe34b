#pragma once

#include "irsmec/channel.hpp"
#include "irsmec/types.hpp"

namespace irsmec {

/// Throws std::invalid_argument if phases has the wrong length or any
/// |phi_n| exceeds 1 + 1e-9.
void validate_phases(const ChannelSet& channels, const PhaseVector& phases);

/// Combined uplink channel of user k: the surface cascade plus the direct
/// path, h_k(phi) = G diag(phi) h_r_k + h_d_k.
CVector effective_channel(const ChannelSet& channels, const PhaseVector& phases, int k);

/// All K effective channels, column k per user.
CMatrix effective_channels(const ChannelSet& channels, const PhaseVector& phases);

/// Cascade operator of user k, F_k = G diag(h_r_k), so that
/// h_k(phi) = F_k phi + h_d_k. Used by the subproblem builders.
CMatrix cascade_operator(const ChannelSet& channels, int k);

/// Noise-plus-interference covariance seen by user k's receiver:
/// sigma^2 I + sum_{i != k} q_i h_i h_i^H.
CMatrix interference_covariance(const ChannelSet& channels, const PhaseVector& phases, int k);

/// Same with the desired user included: sigma^2 I + sum_j q_j h_j h_j^H.
CMatrix full_covariance(const ChannelSet& channels, const PhaseVector& phases);

/// SINR of user k under an arbitrary receive vector.
double sinr(const ChannelSet& channels, const PhaseVector& phases, int k,
            const CVector& receiver);

/// Unit-norm SINR-maximizing receiver for user k.
CVector optimal_receiver(const ChannelSet& channels, const PhaseVector& phases, int k);

/// Maximum SINR of user k, q_k h_k^H W_k^{-1} h_k.
double max_sinr(const ChannelSet& channels, const PhaseVector& phases, int k);

/// Achievable rate of user k in nats, log(1 + max SINR).
double rate(const ChannelSet& channels, const PhaseVector& phases, int k);

/// All K rates.
RVector rates(const ChannelSet& channels, const PhaseVector& phases);

/// Mean squared symbol-estimate error of user k under receiver w:
/// |1 - sqrt(q_k) w^H h_k|^2 + sum_{j != k} q_j |w^H h_j|^2 + sigma^2 |w|^2.
double mse(const ChannelSet& channels, const PhaseVector& phases, int k, const CVector& receiver);

/// MSE-minimizing receiver for user k (unnormalized).
CVector mmse_receiver(const ChannelSet& channels, const PhaseVector& phases, int k);

/// One MMSE receiver per user, column-wise.
ReceiverBank mmse_receivers(const ChannelSet& channels, const PhaseVector& phases);

/// Minimum MSE of user k; equals 1 / (1 + max SINR), so it lies in (0, 1].
double min_mse(const ChannelSet& channels, const PhaseVector& phases, int k);

}  // namespace irsmec
