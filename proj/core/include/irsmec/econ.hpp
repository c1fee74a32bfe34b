#pragma once

#include <vector>

#include "irsmec/types.hpp"

namespace irsmec {

/// Computation task of one device plus the device's cost weights and the
/// execution-side constants needed to price offloading.
struct TaskProfile {
  double data_bits = 1.0;           // b_k, task payload handed to the server
  double cpu_cycles = 1e6;          // d_k, cycles to finish the task
  double local_rate_cps = 1e7;      // c_k^m, device CPU cycles per second
  double edge_rate_cps = 1e9;       // c^e, server CPU cycles per second
  double energy_per_cycle_j = 1e-8; // mu_k, device energy per local cycle
  double tx_power_w = 1.0;          // nu_k, device radio power while sending
  double tail_energy_j = 1e-3;      // L_k, fixed energy of one offload
  double time_weight = 0.5;         // w_k^t
  double energy_weight = 0.5;       // w_k^e
  double task_benefit = 1.0;        // f_k, value of a completed task

  /// Throws std::invalid_argument on non-positive processing rates or a
  /// negative payload, weight, energy, or cycle count.
  void validate() const;
};

/// Rate-independent reduction of the offloading trade: user k offloads
/// exactly when payment <= edge_advantage_k - transmit_cost_scale_k / rate.
struct OffloadEconomy {
  RVector edge_advantage;       // C_k: cost saved by edge execution, transmission excluded
  RVector transmit_cost_scale;  // A_k: time-and-energy cost per unit of 1/rate
  RVector rate_floor;           // r_k: admission rate floor, nats
};

/// Device cost-weighted utility of computing locally.
double local_utility(const TaskProfile& task);

/// Device utility of offloading at the given uplink rate (nats/s per unit
/// bandwidth; the profile's bits are measured in the same normalization)
/// and paying `payment`. Throws std::domain_error when rate <= 0.
double edge_utility(const TaskProfile& task, double rate, double payment);

/// Collapses task profiles into the C_k, A_k coefficients and attaches the
/// given per-user rate floors.
OffloadEconomy derive_economy(const std::vector<TaskProfile>& tasks, const RVector& rate_floors);

/// 1 when offloading weakly dominates local execution at this rate and
/// payment (boundary included), else 0.
bool offload_decision(const OffloadEconomy& economy, int k, double rate, double payment);

/// Largest payment user k accepts at this rate: C_k - A_k / rate.
/// -infinity when rate == 0 and A_k > 0.
double payment_bound(const OffloadEconomy& economy, int k, double rate);

/// Earning when every user is served at its payment bound and users with a
/// negative bound are skipped: sum_k max(C_k - A_k / R_k, 0).
double server_earning_p1(const OffloadEconomy& economy, const RVector& rates);

/// Earning when all users are admitted: sum_k (C_k - A_k / R_k).
/// Throws std::domain_error when any rate is <= 0.
double server_earning_p2(const OffloadEconomy& economy, const RVector& rates);

/// The equivalent minimization objective sum_k A_k / R_k.
double transmit_cost_objective(const OffloadEconomy& economy, const RVector& rates);

}  // namespace irsmec
