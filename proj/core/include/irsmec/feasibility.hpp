#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "irsmec/channel.hpp"
#include "irsmec/qcqp.hpp"
#include "irsmec/signal.hpp"
#include "irsmec/types.hpp"

namespace irsmec {

enum class IrsMode { None, Random, Optimized };

struct FeasibilityOptions {
  double conv_tol = 1e-5;   // stop when the relative alpha decrease falls below this
  // Iteration budget per start. The search typically crosses alpha <= 1
  // within ten iterations when the floors are achievable; past the knee the
  // descent plateaus, so a tight budget keeps infeasible verdicts cheap
  // without affecting soundness (feasible claims are always re-verified).
  int max_iterations = 25;
  int restarts = 5;         // random initial phase draws per check
  std::uint64_t seed = 1;   // drives the initial draws
  QcqpOptions qcqp;
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<PhaseVector> phase;   // certificate, present iff feasible
  std::vector<double> alpha_trace;    // after each iteration of the winning start
  int iterations = 0;                 // iterations of the winning (or last) start
  int restarts_used = 0;
  ReceiverBank receivers;             // final receive vectors of the winning start
  RVector final_rates;                // true rates at the reported phase
};

/// Scaled-MSE value max_k e^{r_k} mse_k that Alg. 1 drives below one.
double scaled_mse_alpha(const ChannelSet& channels, const PhaseVector& phases,
                        const ReceiverBank& receivers, const RVector& rate_floors);

/// Epigraph subproblem over phi for fixed receivers: minimize alpha subject
/// to e^{r_k} mse_k(phi, w_k) <= alpha and the unit disks.
QcqpProblem build_p8(const ChannelSet& channels, const ReceiverBank& receivers,
                     const RVector& rate_floors);

/// Draws |phi_n|^2 uniform on [0,1] and phases uniform on [0, 2pi).
PhaseVector random_phases(int irs_elements, std::uint64_t seed);

/// One run of the alternating feasibility search from a given initial
/// phase vector. A feasible claim is re-verified against true rates before
/// it is reported.
FeasibilityResult feasibility_check_single(const ChannelSet& channels, const RVector& rate_floors,
                                           const PhaseVector& initial,
                                           const FeasibilityOptions& options = {});

/// Multi-start wrapper: up to options.restarts random initial draws, first
/// verified feasible certificate wins.
FeasibilityResult feasibility_check(const ChannelSet& channels, const RVector& rate_floors,
                                    const FeasibilityOptions& options = {});

/// Fraction of `trials` independent channel realizations for which the
/// common rate floor is achievable under the given IRS mode. Mode None
/// evaluates rates without any surface contribution, Random accepts a
/// realization when any of options.restarts random draws meets the floor,
/// Optimized runs the full search from those same draws.
double feasibility_probability(const SystemGeometry& geometry, double rate_floor, int trials,
                               std::uint64_t seed, IrsMode mode,
                               const FeasibilityOptions& options = {});

/// feasibility_probability over a whole floor grid, one probability per
/// floor, reusing each trial realization across floors. Per trial the
/// feasible set of common floors is a downward-closed interval (rates are
/// fixed in modes None/Random; in mode Optimized the search trajectory is
/// invariant under the common e^{floor} rescaling of the constraints), so
/// the sweep stops at the first infeasible floor and inherits the verdict
/// upward. Results match per-floor feasibility_probability calls.
std::vector<double> feasibility_probability_sweep(const SystemGeometry& geometry,
                                                  const std::vector<double>& floor_grid,
                                                  int trials, std::uint64_t seed, IrsMode mode,
                                                  const FeasibilityOptions& options = {});

}  // namespace irsmec
