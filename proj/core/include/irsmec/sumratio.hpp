#pragma once

#include <cstdint>
#include <vector>

#include "irsmec/channel.hpp"
#include "irsmec/econ.hpp"
#include "irsmec/feasibility.hpp"
#include "irsmec/qcqp.hpp"
#include "irsmec/signal.hpp"
#include "irsmec/types.hpp"

namespace irsmec {

enum class SumRatioStatus { Converged, MaxIterations, Infeasible };

struct SumRatioOptions {
  double newton_tol = 1e-8;       // rho: stop once the residual delta falls below this
  int max_newton_iterations = 100;
  double inner_tol = 1e-6;        // relative objective change that ends the inner descent
  int max_inner_iterations = 100;
  double backtrack_shrink = 0.5;  // xi
  double backtrack_slack = 0.01;  // epsilon in the acceptance test
  int max_backtrack = 60;
  FeasibilityOptions feasibility; // finds the initial phase certificate
  QcqpOptions qcqp;               // used by the per-iteration phase subproblem
};

struct SumRatioResult {
  SumRatioStatus status = SumRatioStatus::Infeasible;
  PhaseVector phase;
  ReceiverBank receivers;            // scaled receive vectors v_k of the final iterate
  RVector weights;                   // varpi_k
  RVector lambda;                    // multipliers lambda_k ~ 1/R_k
  RVector mu;                        // multipliers mu_k ~ A_k/R_k
  RVector surrogate_rates;           // rate lower bounds at exit (tight: equal true rates)
  RVector final_rates;               // true achievable rates at `phase`
  double earning = 0.0;              // sum_k (C_k - A_k/R_k) at the final rates
  double start_cost = 0.0;           // sum_k A_k/R_k at the feasible starting phase
  std::vector<double> objective_trace;   // sum_k A_k/R_k after each outer iteration
  std::vector<double> min_slack_trace;   // min_k (R_k - r_k) after each outer iteration
  std::vector<double> delta_pre_trace;   // residual of incoming multipliers vs new rates
  std::vector<double> delta_post_trace;  // residual left after the damped update
  std::vector<int> backtrack_trace;      // damping halvings accepted per outer iteration
  std::vector<int> inner_iterations;     // alternating-descent rounds per outer iteration
  int newton_iterations = 0;
};

/// Scaled MMSE receive vectors v_k = q_k W^-1 h_k(phi) that make the rate
/// surrogate tight in the receive-vector block.
ReceiverBank update_receivers(const ChannelSet& channels, const PhaseVector& phases);

/// Per-user surrogate weights that are optimal for the given (phase,
/// receiver) pair; with receivers from update_receivers they equal
/// (1 + sinr_k) / q_k.
RVector update_weights(const ChannelSet& channels, const PhaseVector& phases,
                       const ReceiverBank& receivers);

/// Concave quadratic lower bound on the rate of user k as a function of the
/// phase vector, parameterized by a receive vector and a weight. Tight
/// (value equals the true rate) when both come from the update functions.
QuadraticForm rate_surrogate(const ChannelSet& channels, int k, const CVector& receiver,
                             double weight);

/// Phase subproblem at fixed multipliers and surrogate parameters:
/// maximize sum_k lambda_k mu_k Rtilde_k(phi) subject to the per-user rate
/// floors Rtilde_k(phi) >= r_k and the unit disks.
QcqpProblem build_p12(const ChannelSet& channels, const ReceiverBank& receivers,
                      const RVector& weights, const RVector& lambda, const RVector& mu,
                      const RVector& rate_floors);

struct InnerSolve {
  int iterations = 0;
  double objective = 0.0;  // final weighted surrogate sum rate sum_k lambda_k mu_k Rtilde_k
};

/// Alternating ascent over (receivers, weights) and the phase vector at
/// fixed multipliers, stopped on the relative change of the inner objective
/// sum_k lambda_k (A_k - mu_k Rtilde_k), with A_k taken from cost_scales.
/// Updates the three iterate arguments in place; on return the surrogate
/// parameters are refreshed at the final phase, so
/// rate_surrogate(...).eval(phases) equals the true rate of every user.
InnerSolve inner_bcd(const ChannelSet& channels, const RVector& rate_floors,
                     const RVector& lambda, const RVector& mu, const RVector& cost_scales,
                     PhaseVector& phases, ReceiverBank& receivers, RVector& weights,
                     const SumRatioOptions& options = {});

/// Stacked fixed-point residuals: entries 0..K-1 hold lambda_k R_k - 1,
/// entries K..2K-1 hold mu_k R_k - A_k.
RVector newton_residuals(const RVector& lambda, const RVector& mu, const RVector& rates,
                         const RVector& cost_scales);

struct NewtonStep {
  RVector lambda;
  RVector mu;
  double delta_pre = 0.0;   // squared residual norm before the update
  double delta_post = 0.0;  // squared residual norm after it
  int backtracks = 0;       // damping halvings needed by the acceptance test
};

/// One damped Newton update of the multipliers at fixed rates: the full
/// step is shrunk by `backtrack_shrink` until the residual norm drops by
/// the Eq.-style factor (1 - slack * step).
NewtonStep newton_step(const RVector& lambda, const RVector& mu, const RVector& rates,
                       const RVector& cost_scales, const SumRatioOptions& options = {});

/// Maximizes the server earning sum_k (C_k - A_k/R_k(phi)) over the phase
/// shifts subject to per-user rate floors. Finds a feasible starting phase
/// first; status Infeasible (with empty iterate fields) when none is found.
SumRatioResult optimize(const ChannelSet& channels, const OffloadEconomy& economy,
                        const SumRatioOptions& options = {});

}  // namespace irsmec
