#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "instances.hpp"
#include "irsmec/sumratio.hpp"
#include "oracles.hpp"

using namespace irsmec;

namespace {

ChannelSet scalar_channel() {
  ChannelSet ch;
  ch.irs_to_ap = CMatrix::Zero(1, 0);
  ch.user_to_irs = {CVector(0)};
  ch.user_to_ap = {CVector::Constant(1, Complex(1.0, 0.0))};
  ch.tx_power_mw = RVector::Constant(1, 1.0);
  ch.noise_mw = 1.0;
  return ch;
}

OffloadEconomy flat_economy(int k, double advantage, double cost) {
  OffloadEconomy e;
  e.edge_advantage = RVector::Constant(k, advantage);
  e.transmit_cost_scale = RVector::Constant(k, cost);
  e.rate_floor = RVector::Zero(k);
  return e;
}

}  // namespace

TEST_CASE("scalar receive vector and weight") {
  // Unit channel, unit power, unit noise: v = 1/2 and the weight that makes
  // the bound tight is 2, reproducing the log 2 rate exactly.
  const ChannelSet ch = scalar_channel();
  const PhaseVector phi(0);
  const ReceiverBank v = update_receivers(ch, phi);
  CHECK(std::abs(v(0, 0) - Complex(0.5, 0.0)) <= 1e-12);
  const RVector w = update_weights(ch, phi, v);
  CHECK(w(0) == doctest::Approx(2.0).epsilon(1e-12));
  const QuadraticForm f = rate_surrogate(ch, 0, v.col(0), w(0));
  CHECK(f.eval(phi) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("optimal weights are one plus the SINR over the power") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const ChannelSet ch = test::make_instance(3, 2, 4, 700 + trial);
    const PhaseVector phi = test::random_disk_phases(4, rng);
    const ReceiverBank v = update_receivers(ch, phi);
    const RVector w = update_weights(ch, phi, v);
    for (int k = 0; k < 2; ++k) {
      CHECK(w(k) ==
            doctest::Approx((1.0 + max_sinr(ch, phi, k)) / ch.tx_power_mw(k)).epsilon(1e-9));
      // The scaled vector points along the SINR-optimal receiver.
      const CVector dir = optimal_receiver(ch, phi, k);
      const CVector vk = v.col(k) / v.col(k).norm();
      CHECK(std::abs(dir.dot(vk)) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("the rate surrogate is tight at the update point and below elsewhere") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 2);
    const int k = 1 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 5);
    const ChannelSet ch = test::make_instance(m, k, n, 800 + trial);
    const PhaseVector phi = test::random_disk_phases(n, rng);
    const ReceiverBank v = update_receivers(ch, phi);
    const RVector w = update_weights(ch, phi, v);
    for (int u = 0; u < k; ++u) {
      const double truth = rate(ch, phi, u);
      CHECK(rate_surrogate(ch, u, v.col(u), w(u)).eval(phi) ==
            doctest::Approx(truth).epsilon(1e-9));
      // Any other weight or receiver can only fall below the true rate.
      CHECK(rate_surrogate(ch, u, v.col(u), 1.3 * w(u)).eval(phi) < truth);
      CHECK(rate_surrogate(ch, u, v.col(u), 0.6 * w(u)).eval(phi) < truth);
      const CVector other = test::random_unit_receiver(m, rng);
      CHECK(rate_surrogate(ch, u, other, w(u)).eval(phi) <= truth + 1e-12);
      // And at a different phase vector it stays a lower bound.
      const PhaseVector elsewhere = test::random_disk_phases(n, rng);
      CHECK(rate_surrogate(ch, u, v.col(u), w(u)).eval(elsewhere) <=
            rate(ch, elsewhere, u) + 1e-9);
    }
  }
}

TEST_CASE("a zero receive vector collapses the surrogate") {
  const ChannelSet ch = test::make_instance(2, 2, 3, 53);
  const PhaseVector phi = PhaseVector::Zero(3);
  const double w = 1.0 / ch.tx_power_mw(0);
  const QuadraticForm f = rate_surrogate(ch, 0, CVector::Zero(2), w);
  CHECK(f.matrix.norm() == 0.0);
  CHECK(f.linear.norm() == 0.0);
  CHECK(f.constant == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(rate_surrogate(ch, 0, CVector::Zero(2), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rate_surrogate(ch, 5, CVector::Zero(2), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rate_surrogate(ch, 0, CVector::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("the phase subproblem stacks the weighted surrogates") {
  std::mt19937_64 rng(54);
  const ChannelSet ch = test::make_instance(3, 3, 4, 55);
  const PhaseVector anchor = test::random_disk_phases(4, rng);
  const ReceiverBank v = update_receivers(ch, anchor);
  const RVector w = update_weights(ch, anchor, v);
  const RVector lambda = (RVector(3) << 0.9, 0.4, 1.7).finished();
  const RVector mu = (RVector(3) << 2.0, 0.0, 0.3).finished();
  const RVector floors = (RVector(3) << 0.1, 0.0, 0.2).finished();
  const QcqpProblem p = build_p12(ch, v, w, lambda, mu, floors);

  REQUIRE(p.sense == Sense::Maximize);
  REQUIRE(static_cast<int>(p.constraints.size()) == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(p.constraints[static_cast<size_t>(k)].direction == Direction::GreaterEqual);
    CHECK(p.constraints[static_cast<size_t>(k)].bound == floors(k));
  }
  for (int draw = 0; draw < 5; ++draw) {
    const PhaseVector phi = test::random_disk_phases(4, rng);
    double expected = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double surr = rate_surrogate(ch, k, v.col(k), w(k)).eval(phi);
      expected += lambda(k) * mu(k) * surr;
      CHECK(p.constraints[static_cast<size_t>(k)].form.eval(phi) ==
            doctest::Approx(surr).epsilon(1e-12));
    }
    CHECK(p.objective.eval(phi) == doctest::Approx(expected).epsilon(1e-10));
  }

  CHECK(build_p12(ch, v, w, RVector::Zero(3), RVector::Zero(3), floors).objective.matrix.norm() ==
        0.0);
  CHECK_THROWS_AS(build_p12(ch, v, w, -lambda, mu, floors), std::invalid_argument);
  CHECK_THROWS_AS(build_p12(ch, v, w, lambda.head(2), mu, floors), std::invalid_argument);
}

TEST_CASE("fixed-point residuals and the damped update") {
  const RVector rates = (RVector(2) << 2.0, 0.5).finished();
  const RVector a = (RVector(2) << 3.0, 1.0).finished();

  // At lambda = 1/R, mu = A/R the residual vanishes identically.
  const RVector r0 = newton_residuals(rates.cwiseInverse(), a.cwiseQuotient(rates), rates, a);
  CHECK(r0.norm() == 0.0);

  const RVector lambda = (RVector(2) << 0.9, 1.1).finished();
  const RVector mu = (RVector(2) << 0.2, 2.5).finished();
  const RVector r = newton_residuals(lambda, mu, rates, a);
  CHECK(r(0) == doctest::Approx(0.8).epsilon(1e-12));   // 0.9 * 2 - 1
  CHECK(r(1) == doctest::Approx(-0.45).epsilon(1e-12)); // 1.1 * 0.5 - 1
  CHECK(r(2) == doctest::Approx(-2.6).epsilon(1e-12));  // 0.2 * 2 - 3
  CHECK(r(3) == doctest::Approx(0.25).epsilon(1e-12));  // 2.5 * 0.5 - 1
  CHECK_THROWS_AS(newton_residuals(lambda, mu.head(1), rates, a), std::invalid_argument);

  // The residual is affine in the multipliers at fixed rates, so the full
  // step lands exactly on the fixed point: no damping is ever needed.
  const NewtonStep step = newton_step(lambda, mu, rates, a);
  CHECK(step.backtracks == 0);
  CHECK(step.delta_pre == doctest::Approx(r.squaredNorm()).epsilon(1e-12));
  CHECK(step.delta_post <= 1e-24);
  CHECK((step.lambda - rates.cwiseInverse()).norm() <= 1e-12);
  CHECK((step.mu - a.cwiseQuotient(rates)).norm() <= 1e-12);

  SumRatioOptions opt;
  const double factor = 1.0 - opt.backtrack_slack * std::pow(opt.backtrack_shrink, step.backtracks);
  CHECK(step.delta_post <= factor * factor * step.delta_pre);

  CHECK_THROWS_AS(newton_step(lambda, mu, RVector::Zero(2), a), std::domain_error);
}

TEST_CASE("the inner descent is monotone in its budget and keeps the floors") {
  const ChannelSet ch = test::make_instance(3, 2, 6, 60);
  const RVector floors = RVector::Constant(2, 0.2);
  const RVector lambda = RVector::Constant(2, 0.8);
  const RVector mu = RVector::Constant(2, 1.5);
  const RVector a = RVector::Constant(2, 2.0);
  const PhaseVector phi0 = random_phases(6, 3);

  double prev = -std::numeric_limits<double>::infinity();
  for (int budget = 1; budget <= 5; ++budget) {
    SumRatioOptions opt;
    opt.max_inner_iterations = budget;
    PhaseVector phi = phi0;
    ReceiverBank v;
    RVector w;
    const InnerSolve s = inner_bcd(ch, floors, lambda, mu, a, phi, v, w, opt);
    CHECK(s.iterations == budget);
    CHECK(s.objective >= prev - 1e-9);
    prev = s.objective;
    CHECK((rates(ch, phi) - floors).minCoeff() >= -1e-6);
    // On return the surrogate parameters are refreshed at the final phase.
    for (int k = 0; k < 2; ++k) {
      CHECK(rate_surrogate(ch, k, v.col(k), w(k)).eval(phi) ==
            doctest::Approx(rate(ch, phi, k)).epsilon(1e-9));
    }
  }
}

TEST_CASE("a one-element cell is driven to the aligned phase") {
  ChannelSet ch;
  ch.irs_to_ap = CMatrix::Constant(1, 1, Complex(0.8, 0.3));
  ch.user_to_irs = {CVector::Constant(1, Complex(-0.2, 0.7))};
  ch.user_to_ap = {CVector::Constant(1, Complex(0.5, -0.4))};
  ch.tx_power_mw = RVector::Constant(1, 1.3);
  ch.noise_mw = 0.9;
  const SumRatioResult res = optimize(ch, flat_economy(1, 1.0, 1.0));
  REQUIRE(res.status == SumRatioStatus::Converged);

  const double cascade = std::abs(ch.irs_to_ap(0, 0) * ch.user_to_irs[0](0));
  const double direct = std::abs(ch.user_to_ap[0](0));
  const double best_rate =
      std::log(1.0 + ch.tx_power_mw(0) * std::pow(cascade + direct, 2) / ch.noise_mw);
  CHECK(res.final_rates(0) == doctest::Approx(best_rate).epsilon(1e-6));
  CHECK(std::abs(res.phase(0)) == doctest::Approx(1.0).epsilon(1e-5));

  // Re-firing the inner descent at the fixed point moves nothing.
  SumRatioOptions opt;
  PhaseVector phi = res.phase;
  ReceiverBank v = res.receivers;
  RVector w = res.weights;
  const InnerSolve again = inner_bcd(ch, RVector::Zero(1), res.lambda, res.mu,
                                     RVector::Constant(1, 1.0), phi, v, w, opt);
  CHECK(std::abs(again.objective - res.lambda(0) * res.mu(0) * res.final_rates(0)) <= 1e-9);
}

TEST_CASE("a full run reports a consistent record") {
  const ChannelSet ch = test::make_instance(3, 2, 4, 61);
  OffloadEconomy eco = flat_economy(2, 3.0, 1.0);
  eco.transmit_cost_scale(1) = 2.0;
  const SumRatioResult res = optimize(ch, eco);
  REQUIRE(res.status == SumRatioStatus::Converged);

  const size_t outers = static_cast<size_t>(res.newton_iterations);
  REQUIRE(res.objective_trace.size() == outers);
  REQUIRE(res.min_slack_trace.size() == outers);
  REQUIRE(res.delta_pre_trace.size() == outers);
  REQUIRE(res.delta_post_trace.size() == outers);
  REQUIRE(res.backtrack_trace.size() == outers);
  REQUIRE(res.inner_iterations.size() == outers);

  SumRatioOptions opt;
  CHECK(res.delta_pre_trace.back() < opt.newton_tol);
  for (size_t t = 0; t < outers; ++t) {
    CHECK(res.min_slack_trace[t] >= -1e-6);
    const double factor =
        1.0 - opt.backtrack_slack * std::pow(opt.backtrack_shrink, res.backtrack_trace[t]);
    CHECK(res.delta_post_trace[t] <= factor * factor * res.delta_pre_trace[t] + 1e-18);
  }

  const RVector achieved = rates(ch, res.phase);
  CHECK((achieved - res.final_rates).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(res.objective_trace.back() ==
        doctest::Approx(transmit_cost_objective(eco, achieved)).epsilon(1e-12));
  CHECK(res.earning == doctest::Approx(server_earning_p2(eco, achieved)).epsilon(1e-12));
  CHECK(res.objective_trace.back() <= res.start_cost + 1e-9);
  CHECK((res.surrogate_rates - res.final_rates).cwiseAbs().maxCoeff() <= 1e-9);

  // Terminal multipliers sit on the fixed point within the Newton tolerance.
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(res.lambda(k) * res.final_rates(k) - 1.0) <= 1e-4);
    CHECK(std::abs(res.mu(k) * res.final_rates(k) - eco.transmit_cost_scale(k)) <=
          1e-4 * (1.0 + eco.transmit_cost_scale(k)));
  }
}

TEST_CASE("unreachable floors propagate as infeasible") {
  const ChannelSet ch = test::make_instance(2, 2, 3, 62);
  OffloadEconomy eco = flat_economy(2, 1.0, 1.0);
  eco.rate_floor = RVector::Constant(2, 50.0);
  const SumRatioResult res = optimize(ch, eco);
  CHECK(res.status == SumRatioStatus::Infeasible);
  CHECK(res.phase.size() == 0);
  CHECK(res.objective_trace.empty());
  CHECK(res.newton_iterations == 0);
  CHECK(res.earning == 0.0);

  OffloadEconomy bad = flat_economy(3, 1.0, 1.0);
  CHECK_THROWS_AS(optimize(ch, bad), std::invalid_argument);
  OffloadEconomy negative = flat_economy(2, 1.0, -1.0);
  CHECK_THROWS_AS(optimize(ch, negative), std::invalid_argument);
}

TEST_CASE("runs are deterministic") {
  const ChannelSet ch = test::make_instance(3, 2, 4, 63);
  const OffloadEconomy eco = flat_economy(2, 2.0, 1.5);
  const SumRatioResult a = optimize(ch, eco);
  const SumRatioResult b = optimize(ch, eco);
  REQUIRE(a.status == b.status);
  CHECK(a.newton_iterations == b.newton_iterations);
  CHECK((a.phase - b.phase).norm() == 0.0);
  CHECK(a.earning == b.earning);
}
