#include "irsmec/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace irsmec {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derived_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + 0x9E3779B97F4A7C15ULL * (index + 1));
}

void check_floors(const ChannelSet& ch, const RVector& floors) {
  if (floors.size() != ch.users())
    throw std::invalid_argument("feasibility: floor count mismatches users");
  for (int k = 0; k < floors.size(); ++k) {
    if (floors(k) < 0.0) throw std::invalid_argument("feasibility: rate floors must be non-negative");
  }
}

bool floors_met(const RVector& achieved, const RVector& floors) {
  return ((achieved - floors).array() >= -1e-6).all();
}

}  // namespace

double scaled_mse_alpha(const ChannelSet& ch, const PhaseVector& phi, const ReceiverBank& w,
                        const RVector& floors) {
  check_floors(ch, floors);
  double alpha = 0.0;
  for (int k = 0; k < ch.users(); ++k) {
    alpha = std::max(alpha, std::exp(floors(k)) * mse(ch, phi, k, w.col(k)));
  }
  return alpha;
}

QcqpProblem build_p8(const ChannelSet& ch, const ReceiverBank& w, const RVector& floors) {
  check_floors(ch, floors);
  if (w.rows() != ch.ap_antennas() || w.cols() != ch.users())
    throw std::invalid_argument("feasibility: receiver bank has wrong shape");
  const int kk = ch.users();
  const int n = ch.irs_elements();

  std::vector<CMatrix> cascade;
  cascade.reserve(static_cast<size_t>(kk));
  for (int j = 0; j < kk; ++j) cascade.push_back(cascade_operator(ch, j));

  QcqpProblem p;
  p.epigraph = true;
  p.sense = Sense::Minimize;
  p.disk_radius = 1.0;
  p.constraints.reserve(static_cast<size_t>(kk));
  for (int k = 0; k < kk; ++k) {
    const CVector wk = w.col(k);
    const double scale = std::exp(floors(k));
    QuadraticForm f;
    f.matrix = CMatrix::Zero(n, n);
    f.linear = CVector::Zero(n);
    double cst = 1.0 + ch.noise_mw * wk.squaredNorm();
    for (int j = 0; j < kk; ++j) {
      const CVector aj = cascade[static_cast<size_t>(j)].adjoint() * wk;
      const Complex bj = wk.dot(ch.user_to_ap[static_cast<size_t>(j)]);
      const double qj = ch.tx_power_mw(j);
      f.matrix.selfadjointView<Eigen::Lower>().rankUpdate(aj, qj);
      f.linear += qj * bj * aj;
      cst += qj * std::norm(bj);
    }
    f.matrix = CMatrix(f.matrix.selfadjointView<Eigen::Lower>());
    const double sq = std::sqrt(ch.tx_power_mw(k));
    f.linear -= sq * (cascade[static_cast<size_t>(k)].adjoint() * wk);
    cst -= 2.0 * sq * wk.dot(ch.user_to_ap[static_cast<size_t>(k)]).real();
    f.matrix *= scale;
    f.linear *= scale;
    f.constant = scale * cst;
    p.constraints.push_back({std::move(f), 0.0, Direction::LessEqual});
  }
  return p;
}

PhaseVector random_phases(int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("feasibility: negative element count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PhaseVector phi(n);
  for (int i = 0; i < n; ++i) {
    const double amp = std::sqrt(unif(rng));
    const double theta = 2.0 * std::numbers::pi * unif(rng);
    phi(i) = std::polar(amp, theta);
  }
  return phi;
}

FeasibilityResult feasibility_check_single(const ChannelSet& ch, const RVector& floors,
                                           const PhaseVector& initial,
                                           const FeasibilityOptions& opt) {
  ch.validate();
  check_floors(ch, floors);
  validate_phases(ch, initial);

  FeasibilityResult res;
  PhaseVector phi = initial;
  ReceiverBank w = mmse_receivers(ch, phi);
  double alpha = scaled_mse_alpha(ch, phi, w, floors);
  res.alpha_trace.push_back(alpha);
  res.restarts_used = 1;

  auto finish = [&](bool feasible) {
    res.receivers = w;
    res.final_rates = rates(ch, phi);
    res.feasible = feasible && floors_met(res.final_rates, floors);
    if (res.feasible) res.phase = phi;
    return res;
  };

  if (alpha <= 1.0 || floors_met(rates(ch, phi), floors)) return finish(true);

  for (int it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    w = mmse_receivers(ch, phi);
    alpha = std::min(alpha, scaled_mse_alpha(ch, phi, w, floors));

    if (ch.irs_elements() > 0) {
      const QcqpProblem p8 = build_p8(ch, w, floors);
      const QcqpSolution sol = solve(p8, opt.qcqp, phi);
      // The iterate is judged by its measured value, so a solve that ran
      // out of polish is still usable when it moved downhill.
      if (sol.status != QcqpStatus::InfeasibleDetected) {
        const double cand = scaled_mse_alpha(ch, sol.phase, w, floors);
        if (cand <= alpha) {
          phi = sol.phase;
          alpha = cand;
        }
      }
    }
    const double prev = res.alpha_trace.back();
    res.alpha_trace.push_back(alpha);
    if (alpha <= 1.0) return finish(true);
    if (prev - alpha < opt.conv_tol * std::max(prev, 1e-300)) break;
  }
  return finish(false);
}

FeasibilityResult feasibility_check(const ChannelSet& ch, const RVector& floors,
                                    const FeasibilityOptions& opt) {
  if (opt.restarts < 1) throw std::invalid_argument("feasibility: restarts must be positive");
  FeasibilityResult last;
  for (int attempt = 0; attempt < opt.restarts; ++attempt) {
    const PhaseVector phi0 = random_phases(ch.irs_elements(), derived_seed(opt.seed, attempt));
    last = feasibility_check_single(ch, floors, phi0, opt);
    last.restarts_used = attempt + 1;
    if (last.feasible) return last;
  }
  return last;
}

double feasibility_probability(const SystemGeometry& g, double floor, int trials,
                               std::uint64_t seed, IrsMode mode, const FeasibilityOptions& opt) {
  return feasibility_probability_sweep(g, {floor}, trials, seed, mode, opt).front();
}

std::vector<double> feasibility_probability_sweep(const SystemGeometry& g,
                                                  const std::vector<double>& floor_grid,
                                                  int trials, std::uint64_t seed, IrsMode mode,
                                                  const FeasibilityOptions& opt) {
  if (trials <= 0) throw std::invalid_argument("feasibility: trials must be positive");
  if (floor_grid.empty()) throw std::invalid_argument("feasibility: empty floor grid");
  for (double f : floor_grid)
    if (f < 0.0) throw std::invalid_argument("feasibility: rate floors must be non-negative");

  std::vector<size_t> order(floor_grid.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return floor_grid[a] < floor_grid[b]; });

  std::vector<int> hits(floor_grid.size(), 0);
  for (int trial = 0; trial < trials; ++trial) {
    const ChannelSet ch = generate_channels(g, seed + static_cast<std::uint64_t>(trial));
    const std::uint64_t trial_seed = derived_seed(seed, 0x5EEDULL + trial);

    // Floor-independent per-trial state: achieved min rates for the fixed
    // phase configurations of modes None/Random.
    double fixed_min_rate = 0.0;
    if (mode == IrsMode::None) {
      const PhaseVector off = PhaseVector::Zero(g.irs_elements);
      fixed_min_rate = rates(ch, off).minCoeff();
    } else if (mode == IrsMode::Random) {
      fixed_min_rate = -1.0;
      for (int i = 0; i < opt.restarts; ++i) {
        const PhaseVector phi = random_phases(g.irs_elements, derived_seed(trial_seed, i));
        fixed_min_rate = std::max(fixed_min_rate, rates(ch, phi).minCoeff());
      }
    }

    for (size_t j = 0; j < order.size(); ++j) {
      const double floor = floor_grid[order[j]];
      bool ok = false;
      if (mode == IrsMode::Optimized) {
        FeasibilityOptions run = opt;
        run.seed = trial_seed;
        ok = feasibility_check(ch, RVector::Constant(g.users, floor), run).feasible;
      } else {
        ok = fixed_min_rate - floor >= -1e-6;
      }
      if (!ok) break;
      ++hits[order[j]];
    }
  }

  std::vector<double> prob(floor_grid.size());
  for (size_t i = 0; i < prob.size(); ++i)
    prob[i] = static_cast<double>(hits[i]) / static_cast<double>(trials);
  return prob;
}

}  // namespace irsmec
