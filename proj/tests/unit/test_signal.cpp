#include <random>

#include "doctest.h"
#include "instances.hpp"
#include "irsmec/signal.hpp"
#include "oracles.hpp"

using namespace irsmec;
using test::make_instance;
using test::random_disk_phases;
using test::random_unit_receiver;

namespace {

/// M=1, K=1, N=0 cell with h = 1, q = 1, sigma^2 = 1: every quantity has a
/// hand-computable value.
ChannelSet scalar_unit_instance() {
  ChannelSet ch;
  ch.irs_to_ap = CMatrix(1, 0);
  ch.user_to_irs = {CVector(0)};
  CVector hd(1);
  hd(0) = Complex(1.0, 0.0);
  ch.user_to_ap = {hd};
  ch.tx_power_mw = RVector::Ones(1);
  ch.noise_mw = 1.0;
  return ch;
}

}  // namespace

TEST_CASE("effective channel: zero reflection and no-IRS cases") {
  const ChannelSet ch = make_instance(4, 3, 8, 1);
  const PhaseVector zero = PhaseVector::Zero(8);
  for (int k = 0; k < 3; ++k)
    CHECK(effective_channel(ch, zero, k) == ch.user_to_ap[static_cast<size_t>(k)]);

  const ChannelSet bare = make_instance(4, 3, 0, 2);
  const PhaseVector empty(0);
  for (int k = 0; k < 3; ++k)
    CHECK(effective_channel(bare, empty, k) == bare.user_to_ap[static_cast<size_t>(k)]);
}

TEST_CASE("effective channel matches the entrywise summation oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelSet ch = make_instance(2 + trial % 4, 1 + trial % 3, 1 + trial % 9, 100 + trial);
    const PhaseVector phi = random_disk_phases(ch.irs_elements(), rng);
    for (int k = 0; k < ch.users(); ++k) {
      const CVector lib = effective_channel(ch, phi, k);
      const CVector ora = test::effective_channel_direct(ch, phi, k);
      CHECK((lib - ora).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  CHECK_THROWS_AS(effective_channel(make_instance(2, 2, 3, 1), PhaseVector::Zero(3), 5),
                  std::invalid_argument);
}

TEST_CASE("interference covariance: trivial shapes and loop oracle") {
  const ChannelSet one = make_instance(3, 1, 4, 4);
  std::mt19937_64 rng(5);
  const PhaseVector phi1 = random_disk_phases(4, rng);
  const CMatrix w1 = interference_covariance(one, phi1, 0);
  CHECK((w1 - one.noise_mw * CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  for (int trial = 0; trial < 25; ++trial) {
    const ChannelSet ch = make_instance(2 + trial % 3, 2 + trial % 3, 5, 200 + trial);
    const PhaseVector phi = random_disk_phases(5, rng);
    for (int k = 0; k < ch.users(); ++k) {
      const CMatrix w = interference_covariance(ch, phi, k);
      CHECK((w - w.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((w - test::covariance_loop(ch, phi, k, false)).cwiseAbs().maxCoeff() < 1e-11);
    }
    const CMatrix full = full_covariance(ch, phi);
    CHECK((full - test::covariance_loop(ch, phi, 0, true)).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("covariances are Hermitian positive definite down to the noise floor") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const ChannelSet ch = make_instance(4, 3, 6, 300 + trial);
    const PhaseVector phi = random_disk_phases(6, rng);
    for (int k = 0; k < ch.users(); ++k) {
      const Eigen::SelfAdjointEigenSolver<CMatrix> eig(interference_covariance(ch, phi, k));
      CHECK(eig.eigenvalues().minCoeff() >= ch.noise_mw * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("optimal receiver: scalar case, unit norm, dominance") {
  const ChannelSet unit = scalar_unit_instance();
  const PhaseVector empty(0);
  CHECK(std::abs(optimal_receiver(unit, empty, 0)(0) - Complex(1.0, 0.0)) < 1e-12);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const ChannelSet ch = make_instance(4, 3, 5, 400 + trial);
    const PhaseVector phi = random_disk_phases(5, rng);
    for (int k = 0; k < ch.users(); ++k) {
      const CVector u = optimal_receiver(ch, phi, k);
      CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
      const double best = max_sinr(ch, phi, k);
      CHECK(sinr(ch, phi, k, u) == doctest::Approx(best).epsilon(1e-9));
      for (int r = 0; r < 100; ++r)
        CHECK(sinr(ch, phi, k, random_unit_receiver(4, rng)) <= best * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("receiver scale invariance of the SINR") {
  std::mt19937_64 rng(8);
  const ChannelSet ch = make_instance(3, 2, 4, 500);
  const PhaseVector phi = random_disk_phases(4, rng);
  const CVector u = random_unit_receiver(3, rng);
  const double base = sinr(ch, phi, 0, u);
  for (const Complex c : {Complex(2.5, 0.0), Complex(0.0, -3.0), Complex(1e-3, 1e-3)})
    CHECK(sinr(ch, phi, 0, c * u) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("max SINR and rate: scalar values and monotonicity in power") {
  ChannelSet ch = scalar_unit_instance();
  const PhaseVector empty(0);
  CHECK(max_sinr(ch, empty, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rate(ch, empty, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  ch.tx_power_mw(0) = 0.0;  // not a valid ChannelSet, but the formula is total
  CHECK(max_sinr(ch, empty, 0) == 0.0);
  CHECK(rate(ch, empty, 0) == 0.0);

  std::mt19937_64 rng(9);
  ChannelSet rnd = make_instance(3, 3, 4, 600);
  const PhaseVector phi = random_disk_phases(4, rng);
  const double before = rate(rnd, phi, 1);
  rnd.tx_power_mw(1) *= 2.0;
  CHECK(rate(rnd, phi, 1) > before);
}

TEST_CASE("mse: hand expansion, zero receiver, Monte-Carlo oracle") {
  const ChannelSet unit = scalar_unit_instance();
  const PhaseVector empty(0);
  CVector w(1);
  w(0) = Complex(0.5, 0.0);
  CHECK(mse(unit, empty, 0, w) == doctest::Approx(0.5).epsilon(1e-12));
  w(0) = Complex(0.0, 0.0);
  CHECK(mse(unit, empty, 0, w) == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(10);
  const ChannelSet ch = make_instance(3, 3, 2, 700);
  const PhaseVector phi = random_disk_phases(2, rng);
  const CVector wr = 0.3 * random_unit_receiver(3, rng);
  const double closed = mse(ch, phi, 1, wr);
  const double mc = test::mse_monte_carlo(ch, phi, 1, wr, 1000000, 77);
  CHECK(mc == doctest::Approx(closed).epsilon(0.01));
}

TEST_CASE("mmse receiver: scalar value, dominance, closed-form minimum") {
  const ChannelSet unit = scalar_unit_instance();
  const PhaseVector empty(0);
  CHECK(std::abs(mmse_receiver(unit, empty, 0)(0) - Complex(0.5, 0.0)) < 1e-12);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const ChannelSet ch = make_instance(4, 3, 5, 800 + trial);
    const PhaseVector phi = random_disk_phases(5, rng);
    std::uniform_real_distribution<double> scale(0.0, 2.0);
    for (int k = 0; k < ch.users(); ++k) {
      const CVector w = mmse_receiver(ch, phi, k);
      const double best = mse(ch, phi, k, w);
      CHECK(best == doctest::Approx(min_mse(ch, phi, k)).epsilon(1e-10));
      for (int r = 0; r < 100; ++r)
        CHECK(mse(ch, phi, k, scale(rng) * random_unit_receiver(4, rng)) >= best * (1.0 - 1e-12));

      // epsilon* = 1 - q h^H Wtilde^{-1} h, evaluated independently.
      const CVector h = effective_channel(ch, phi, k);
      const CMatrix cov = test::covariance_loop(ch, phi, k, true);
      const double direct = 1.0 - (ch.tx_power_mw(k) * h.dot(cov.llt().solve(h))).real();
      CHECK(best == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}

TEST_CASE("minimum MSE is 1/(1+max SINR)") {
  const ChannelSet unit = scalar_unit_instance();
  const PhaseVector empty(0);
  CHECK(min_mse(unit, empty, 0) == doctest::Approx(0.5).epsilon(1e-12));

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelSet ch = make_instance(2 + trial % 5, 1 + trial % 4, trial % 7, 900 + trial);
    const PhaseVector phi = random_disk_phases(ch.irs_elements(), rng);
    for (int k = 0; k < ch.users(); ++k) {
      const double eps = min_mse(ch, phi, k);
      CHECK(eps > 0.0);
      CHECK(eps <= 1.0 + 1e-12);
      CHECK(std::abs(eps - 1.0 / (1.0 + max_sinr(ch, phi, k))) < 1e-9);
    }
  }
}

TEST_CASE("phase validation enforces the disk bound") {
  const ChannelSet ch = make_instance(2, 2, 3, 13);
  PhaseVector phi = PhaseVector::Zero(3);
  validate_phases(ch, phi);  // fine
  phi(1) = Complex(1.0 + 1e-6, 0.0);
  CHECK_THROWS_AS(validate_phases(ch, phi), std::invalid_argument);
  CHECK_THROWS_AS(validate_phases(ch, PhaseVector::Zero(2)), std::invalid_argument);
}
