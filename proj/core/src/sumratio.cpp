#include "irsmec/sumratio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace irsmec {

namespace {

void check_multipliers(const ChannelSet& ch, const RVector& lambda, const RVector& mu) {
  if (lambda.size() != ch.users() || mu.size() != ch.users())
    throw std::invalid_argument("sumratio: multiplier count mismatches users");
  if ((lambda.array() < 0.0).any() || (mu.array() < 0.0).any())
    throw std::invalid_argument("sumratio: multipliers must be non-negative");
}

void check_floors(const ChannelSet& ch, const RVector& floors) {
  if (floors.size() != ch.users())
    throw std::invalid_argument("sumratio: floor count mismatches users");
  if ((floors.array() < 0.0).any())
    throw std::invalid_argument("sumratio: rate floors must be non-negative");
}

}  // namespace

ReceiverBank update_receivers(const ChannelSet& ch, const PhaseVector& phases) {
  const CMatrix cov = full_covariance(ch, phases);
  const Eigen::LLT<CMatrix> llt(cov);
  const CMatrix h = effective_channels(ch, phases);
  ReceiverBank v(ch.ap_antennas(), ch.users());
  for (int k = 0; k < ch.users(); ++k) v.col(k) = ch.tx_power_mw(k) * llt.solve(h.col(k));
  return v;
}

RVector update_weights(const ChannelSet& ch, const PhaseVector& phases,
                       const ReceiverBank& receivers) {
  if (receivers.rows() != ch.ap_antennas() || receivers.cols() != ch.users())
    throw std::invalid_argument("sumratio: receiver bank has wrong shape");
  const CMatrix cov = full_covariance(ch, phases);
  const CMatrix h = effective_channels(ch, phases);
  RVector w(ch.users());
  for (int k = 0; k < ch.users(); ++k) {
    const CVector vk = receivers.col(k);
    const double q = ch.tx_power_mw(k);
    const double err =
        (vk.dot(cov * vk)).real() - 2.0 * q * h.col(k).dot(vk).real() + q;
    if (!(err > 0.0)) throw std::domain_error("sumratio: degenerate receive vector");
    w(k) = 1.0 / err;
  }
  return w;
}

QuadraticForm rate_surrogate(const ChannelSet& ch, int k, const CVector& v, double weight) {
  if (k < 0 || k >= ch.users()) throw std::invalid_argument("sumratio: user index out of range");
  if (v.size() != ch.ap_antennas())
    throw std::invalid_argument("sumratio: receive vector has wrong length");
  if (!(weight > 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("sumratio: surrogate weight must be positive");
  const int n = ch.irs_elements();
  const double qk = ch.tx_power_mw(k);

  QuadraticForm f;
  f.matrix = CMatrix::Zero(n, n);
  f.linear = CVector::Zero(n);
  double bracket = qk + ch.noise_mw * v.squaredNorm();
  for (int j = 0; j < ch.users(); ++j) {
    const CVector aj = cascade_operator(ch, j).adjoint() * v;
    const Complex bj = ch.user_to_ap[static_cast<size_t>(j)].dot(v);  // h_d_j^H v
    const double qj = ch.tx_power_mw(j);
    f.matrix.selfadjointView<Eigen::Lower>().rankUpdate(aj, -weight * qj);
    f.linear -= weight * qj * std::conj(bj) * aj;
    bracket += qj * std::norm(bj);
    if (j == k) {
      f.linear += weight * qk * aj;
      bracket -= 2.0 * qk * bj.real();
    }
  }
  f.matrix = CMatrix(f.matrix.selfadjointView<Eigen::Lower>());
  f.constant = std::log(weight) + 1.0 + std::log(qk) - weight * bracket;
  return f;
}

QcqpProblem build_p12(const ChannelSet& ch, const ReceiverBank& receivers, const RVector& weights,
                      const RVector& lambda, const RVector& mu, const RVector& floors) {
  check_multipliers(ch, lambda, mu);
  check_floors(ch, floors);
  if (weights.size() != ch.users())
    throw std::invalid_argument("sumratio: weight count mismatches users");
  const int n = ch.irs_elements();

  QcqpProblem p;
  p.sense = Sense::Maximize;
  p.disk_radius = 1.0;
  p.objective.matrix = CMatrix::Zero(n, n);
  p.objective.linear = CVector::Zero(n);
  p.objective.constant = 0.0;
  p.constraints.reserve(static_cast<size_t>(ch.users()));
  for (int k = 0; k < ch.users(); ++k) {
    QuadraticForm f = rate_surrogate(ch, k, receivers.col(k), weights(k));
    const double lm = lambda(k) * mu(k);
    p.objective.matrix += lm * f.matrix;
    p.objective.linear += lm * f.linear;
    p.objective.constant += lm * f.constant;
    p.constraints.push_back({std::move(f), floors(k), Direction::GreaterEqual});
  }
  return p;
}

InnerSolve inner_bcd(const ChannelSet& ch, const RVector& floors, const RVector& lambda,
                     const RVector& mu, const RVector& cost_scales, PhaseVector& phases,
                     ReceiverBank& receivers, RVector& weights, const SumRatioOptions& opt) {
  check_floors(ch, floors);
  check_multipliers(ch, lambda, mu);
  if (cost_scales.size() != ch.users())
    throw std::invalid_argument("sumratio: cost scale count mismatches users");
  validate_phases(ch, phases);

  // The descent is stopped on the relative change of the full objective
  // sum_k lambda_k (A_k - mu_k Rtilde_k). Its first term is constant while
  // the multipliers are held fixed, and the whole expression vanishes at
  // the multiplier fixed point, so the test tightens adaptively as the
  // outer loop closes in.
  const double p11_offset = (lambda.array() * cost_scales.array()).sum();
  InnerSolve out;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= opt.max_inner_iterations; ++it) {
    out.iterations = it;
    receivers = update_receivers(ch, phases);
    weights = update_weights(ch, phases, receivers);
    double obj = 0.0;
    if (ch.irs_elements() > 0) {
      const QcqpProblem p12 = build_p12(ch, receivers, weights, lambda, mu, floors);
      obj = p12.objective.eval(phases);
      const QcqpSolution sol = solve(p12, opt.qcqp, phases);
      if (sol.status != QcqpStatus::InfeasibleDetected && sol.slacks.minCoeff() >= -1e-6) {
        const double cand = p12.objective.eval(sol.phase);
        if (cand >= obj) {
          phases = sol.phase;
          obj = cand;
        }
      }
    } else {
      for (int k = 0; k < ch.users(); ++k) obj += lambda(k) * mu(k) * rate(ch, phases, k);
    }
    if (!std::isnan(last) && obj - last <= opt.inner_tol * std::abs(p11_offset - last)) break;
    last = obj;
  }
  receivers = update_receivers(ch, phases);
  weights = update_weights(ch, phases, receivers);
  out.objective = 0.0;
  for (int k = 0; k < ch.users(); ++k) out.objective += lambda(k) * mu(k) * rate(ch, phases, k);
  return out;
}

RVector newton_residuals(const RVector& lambda, const RVector& mu, const RVector& rates,
                         const RVector& cost_scales) {
  const auto n = lambda.size();
  if (mu.size() != n || rates.size() != n || cost_scales.size() != n)
    throw std::invalid_argument("sumratio: residual input lengths differ");
  RVector r(2 * n);
  r.head(n) = lambda.array() * rates.array() - 1.0;
  r.tail(n) = mu.array() * rates.array() - cost_scales.array();
  return r;
}

NewtonStep newton_step(const RVector& lambda, const RVector& mu, const RVector& rates,
                       const RVector& cost_scales, const SumRatioOptions& opt) {
  if ((rates.array() <= 0.0).any())
    throw std::domain_error("sumratio: newton update needs positive rates");
  NewtonStep out;
  const RVector r0 = newton_residuals(lambda, mu, rates, cost_scales);
  out.delta_pre = r0.squaredNorm();
  const double pre_norm = std::sqrt(out.delta_pre);

  const RVector dl = (1.0 - lambda.array() * rates.array()) / rates.array();
  const RVector dm = (cost_scales.array() - mu.array() * rates.array()) / rates.array();

  double step = 1.0;
  for (int i = 0; i <= opt.max_backtrack; ++i, step *= opt.backtrack_shrink) {
    out.lambda = lambda + step * dl;
    out.mu = mu + step * dm;
    const double post_norm =
        newton_residuals(out.lambda, out.mu, rates, cost_scales).norm();
    out.backtracks = i;
    out.delta_post = post_norm * post_norm;
    if (post_norm <= (1.0 - opt.backtrack_slack * step) * pre_norm) break;
  }
  return out;
}

SumRatioResult optimize(const ChannelSet& ch, const OffloadEconomy& economy,
                        const SumRatioOptions& opt) {
  ch.validate();
  const auto kk = ch.users();
  if (economy.edge_advantage.size() != kk || economy.transmit_cost_scale.size() != kk ||
      economy.rate_floor.size() != kk)
    throw std::invalid_argument("sumratio: economy sized for a different user count");
  if ((economy.transmit_cost_scale.array() < 0.0).any())
    throw std::invalid_argument("sumratio: negative transmit cost scale");

  SumRatioResult res;
  const FeasibilityResult feas = feasibility_check(ch, economy.rate_floor, opt.feasibility);
  if (!feas.feasible) return res;

  PhaseVector phi = *feas.phase;
  RVector achieved = rates(ch, phi);
  if ((achieved.array() <= 0.0).any())
    throw std::domain_error("sumratio: zero rate at the feasible start");

  RVector lambda = achieved.cwiseInverse();
  RVector mu = economy.transmit_cost_scale.cwiseQuotient(achieved);
  ReceiverBank v = update_receivers(ch, phi);
  RVector w = update_weights(ch, phi, v);
  res.start_cost = transmit_cost_objective(economy, achieved);

  res.status = SumRatioStatus::MaxIterations;
  for (int t = 1; t <= opt.max_newton_iterations; ++t) {
    const InnerSolve inner =
        inner_bcd(ch, economy.rate_floor, lambda, mu, economy.transmit_cost_scale, phi, v, w, opt);
    achieved = rates(ch, phi);
    res.objective_trace.push_back(transmit_cost_objective(economy, achieved));
    res.min_slack_trace.push_back((achieved - economy.rate_floor).minCoeff());
    res.inner_iterations.push_back(inner.iterations);

    const NewtonStep step = newton_step(lambda, mu, achieved, economy.transmit_cost_scale, opt);
    res.delta_pre_trace.push_back(step.delta_pre);
    res.delta_post_trace.push_back(step.delta_post);
    res.backtrack_trace.push_back(step.backtracks);
    lambda = step.lambda;
    mu = step.mu;
    res.newton_iterations = t;
    if (step.delta_pre < opt.newton_tol) {
      res.status = SumRatioStatus::Converged;
      break;
    }
  }

  res.phase = phi;
  res.receivers = v;
  res.weights = w;
  res.lambda = lambda;
  res.mu = mu;
  res.surrogate_rates.resize(kk);
  for (int k = 0; k < kk; ++k)
    res.surrogate_rates(k) = rate_surrogate(ch, k, v.col(k), w(k)).eval(phi);
  res.final_rates = achieved;
  res.earning = server_earning_p2(economy, achieved);
  return res;
}

}  // namespace irsmec
