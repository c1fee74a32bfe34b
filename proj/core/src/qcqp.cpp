#include "irsmec/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace irsmec {

double QuadraticForm::eval(const PhaseVector& phi) const {
  if (phi.size() != linear.size())
    throw std::invalid_argument("qcqp: form evaluated at wrong dimension");
  double v = constant + 2.0 * linear.dot(phi).real();
  if (matrix.rows() > 0) v += (phi.adjoint() * matrix * phi)(0, 0).real();
  return v;
}

int QcqpProblem::dimension() const {
  if (epigraph) {
    return constraints.empty() ? 0 : constraints.front().form.dimension();
  }
  return objective.dimension();
}

void QcqpProblem::validate() const {
  auto check_form = [](const QuadraticForm& f, int n, const std::string& name) {
    if (f.linear.size() != n)
      throw std::invalid_argument("qcqp: " + name + " linear term has wrong dimension");
    if (f.matrix.rows() != f.matrix.cols() || f.matrix.rows() != n)
      throw std::invalid_argument("qcqp: " + name + " matrix has wrong dimension");
  };
  if (!(disk_radius > 0.0)) throw std::invalid_argument("qcqp: disk_radius must be positive");
  const int n = dimension();
  if (epigraph) {
    if (constraints.empty())
      throw std::invalid_argument("qcqp: epigraph problem needs at least one constraint");
    if (sense != Sense::Minimize)
      throw std::invalid_argument("qcqp: epigraph problem must minimize");
  } else {
    check_form(objective, n, "objective");
  }
  for (size_t j = 0; j < constraints.size(); ++j) {
    check_form(constraints[j].form, n, "constraint " + std::to_string(j));
    if (epigraph && constraints[j].direction != Direction::LessEqual)
      throw std::invalid_argument("qcqp: epigraph constraints must be LessEqual");
  }
}

namespace {

// Minimum eigenvalue must not cross zero the wrong way, with slack scaled
// by the largest eigenvalue magnitude.
bool curvature_ok(const CMatrix& m, bool want_psd) {
  if (m.rows() == 0) return true;
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  const RVector ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  const double tol = 1e-8 * std::max(1.0, scale);
  return want_psd ? ev.minCoeff() >= -tol : ev.maxCoeff() <= tol;
}

}  // namespace

bool ConvexityReport::all_ok() const {
  if (!objective_ok) return false;
  return std::all_of(constraint_ok.begin(), constraint_ok.end(), [](bool b) { return b; });
}

std::string ConvexityReport::describe() const {
  std::ostringstream out;
  out << "objective " << (objective_ok ? "ok" : "wrong curvature");
  for (size_t j = 0; j < constraint_ok.size(); ++j) {
    out << ", constraint " << j << ' ' << (constraint_ok[j] ? "ok" : "wrong curvature");
  }
  return out.str();
}

ConvexityReport check_convexity(const QcqpProblem& p) {
  p.validate();
  ConvexityReport rep;
  if (!p.epigraph) {
    rep.objective_ok = curvature_ok(p.objective.matrix, p.sense == Sense::Minimize);
  }
  rep.constraint_ok.reserve(p.constraints.size());
  for (const auto& con : p.constraints) {
    rep.constraint_ok.push_back(
        curvature_ok(con.form.matrix, con.direction == Direction::LessEqual));
  }
  return rep;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Real embedding of one quadratic functional. The quadratic block acts on
// the first nz = 2N coordinates, the linear part on all of them, so an
// appended epigraph or slack variable only ever enters linearly.
struct EForm {
  Eigen::MatrixXd quad;  // nz x nz, symmetric
  Eigen::VectorXd lin;   // ntot
  double cst = 0.0;

  double value(const Eigen::VectorXd& z) const {
    const int nz = static_cast<int>(quad.rows());
    double v = cst + 2.0 * lin.dot(z);
    if (nz > 0) v += z.head(nz).dot(quad * z.head(nz));
    return v;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& z) const {
    const int nz = static_cast<int>(quad.rows());
    Eigen::VectorXd g = 2.0 * lin;
    if (nz > 0) g.head(nz) += 2.0 * (quad * z.head(nz));
    return g;
  }
};

EForm embed(const QuadraticForm& f, double sign, int ntot) {
  const int n = f.dimension();
  EForm e;
  e.quad.setZero(2 * n, 2 * n);
  if (n > 0) {
    const CMatrix herm = 0.5 * sign * (f.matrix + f.matrix.adjoint());
    e.quad.topLeftCorner(n, n) = herm.real();
    e.quad.bottomRightCorner(n, n) = herm.real();
    e.quad.topRightCorner(n, n) = -herm.imag();
    e.quad.bottomLeftCorner(n, n) = herm.imag();
    e.quad = 0.5 * (e.quad + e.quad.transpose()).eval();
  }
  e.lin.setZero(ntot);
  e.lin.head(n) = sign * f.linear.real();
  e.lin.segment(n, n) = sign * f.linear.imag();
  e.cst = sign * f.constant;
  return e;
}

PhaseVector unembed(const Eigen::VectorXd& z, int n) {
  PhaseVector phi(n);
  for (int i = 0; i < n; ++i) phi(i) = Complex(z(i), z(n + i));
  return phi;
}

// Barrier subproblem: minimize objective over { g_j(z) <= 0 } intersected
// with per-element disks on the first 2N coordinates.
struct Barrier {
  int n_complex = 0;
  int ntot = 0;
  double radius2 = 1.0;
  EForm objective;
  std::vector<EForm> cons;

  int constraint_count() const { return static_cast<int>(cons.size()) + n_complex; }

  double disk_value(const Eigen::VectorXd& z, int i) const {
    return z(i) * z(i) + z(n_complex + i) * z(n_complex + i) - radius2;
  }

  double max_constraint(const Eigen::VectorXd& z) const {
    double worst = -kInf;
    for (const auto& g : cons) worst = std::max(worst, g.value(z));
    for (int i = 0; i < n_complex; ++i) worst = std::max(worst, disk_value(z, i));
    return worst;
  }

  bool in_domain(const Eigen::VectorXd& z) const { return max_constraint(z) < 0.0; }

  // The barrier is kept in objective units, psi_t = f0 + (1/t) sum -log(-g),
  // so function values stay O(f0) at every stage; scaling f0 by t instead
  // makes late-stage Armijo decreases smaller than one ulp of psi.
  double psi(double t, const Eigen::VectorXd& z) const {
    double v = objective.value(z);
    double barrier = 0.0;
    for (const auto& g : cons) {
      const double gv = g.value(z);
      if (!(gv < 0.0)) return kInf;
      barrier -= std::log(-gv);
    }
    for (int i = 0; i < n_complex; ++i) {
      const double gv = disk_value(z, i);
      if (!(gv < 0.0)) return kInf;
      barrier -= std::log(-gv);
    }
    return v + barrier / t;
  }

  void gradient_hessian(double t, const Eigen::VectorXd& z, Eigen::VectorXd& grad,
                        Eigen::MatrixXd& hess) const {
    const double wt = 1.0 / t;
    grad = objective.grad(z);
    hess.setZero(ntot, ntot);
    const int nz = static_cast<int>(objective.quad.rows());
    if (nz > 0) hess.topLeftCorner(nz, nz) = 2.0 * objective.quad;
    for (const auto& g : cons) {
      const double gv = g.value(z);
      const Eigen::VectorXd gg = g.grad(z);
      const double inv = wt / (-gv);
      grad += inv * gg;
      hess += (inv / (-gv)) * (gg * gg.transpose());
      const int cz = static_cast<int>(g.quad.rows());
      if (cz > 0) hess.topLeftCorner(cz, cz) += (2.0 * inv) * g.quad;
    }
    for (int i = 0; i < n_complex; ++i) {
      const int ix = i;
      const int iy = n_complex + i;
      const double gv = disk_value(z, i);
      const double inv = wt / (-gv);
      const double gx = 2.0 * z(ix);
      const double gy = 2.0 * z(iy);
      grad(ix) += inv * gx;
      grad(iy) += inv * gy;
      hess(ix, ix) += (inv / (-gv)) * gx * gx + 2.0 * inv;
      hess(iy, iy) += (inv / (-gv)) * gy * gy + 2.0 * inv;
      hess(ix, iy) += (inv / (-gv)) * gx * gy;
      hess(iy, ix) += (inv / (-gv)) * gx * gy;
    }
  }

};

struct CenterResult {
  int steps = 0;
  bool stalled = false;
  double decrement2 = kInf;  // lambda^2 of the last evaluated Newton step
};

// Newton descent on psi_t to the requested decrement, with feasibility and
// Armijo backtracking. decrement_tol is on lambda^2 / 2 in psi units.
CenterResult center(const Barrier& bp, double t, Eigen::VectorXd& z, double decrement_tol,
                    int max_steps, int* newton_budget) {
  CenterResult res;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  for (int it = 0; it < max_steps && *newton_budget > 0; ++it) {
    bp.gradient_hessian(t, z, grad, hess);
    Eigen::VectorXd step;
    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::MatrixXd h = hess;
      if (ridge > 0.0) h.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      step = ldlt.solve(-grad);
      if (ldlt.info() == Eigen::Success && step.allFinite()) break;
      if (attempt >= 3) {
        res.stalled = true;
        return res;
      }
      ridge = (ridge == 0.0) ? 1e-10 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff())
                             : ridge * 100.0;
    }
    const double decrement2 = -grad.dot(step);
    ++res.steps;
    --*newton_budget;
    if (!(decrement2 > 0.0)) {
      // Zero (or roundoff-negative) slope: the gradient has vanished.
      res.decrement2 = 0.0;
      return res;
    }
    res.decrement2 = decrement2;
    if (0.5 * decrement2 <= decrement_tol) return res;
    const double base = bp.psi(t, z);
    // Deep in the quadratic phase the Armijo decrease falls below one ulp
    // of psi; accept any non-increasing in-domain step there instead.
    const bool quad_phase = decrement2 <= 1e-9 * (1.0 + std::abs(base));
    const double slack = quad_phase ? 4e-15 * (1.0 + std::abs(base)) : 0.0;
    double s = 1.0;
    bool ok = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd cand = z + s * step;
      if (bp.in_domain(cand) && bp.psi(t, cand) <= base - 0.25 * s * decrement2 + slack) {
        z = cand;
        ok = true;
        break;
      }
      s *= 0.5;
    }
    if (!ok) {
      res.stalled = true;
      return res;
    }
  }
  return res;
}

struct BarrierRun {
  double t_final = 0.0;
  int steps = 0;
  bool converged = false;
  double decrement2 = kInf;  // of the final centering
};

// Standard path following: center, report, tighten, until the gap estimate
// m / t is below gap_target. The final stage is centered tightly enough
// that the Newton decrement lands safely below gap_target.
BarrierRun follow_path(const Barrier& bp, Eigen::VectorXd& z, const QcqpOptions& opt,
                       double gap_target, int* newton_budget,
                       const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  BarrierRun run;
  const double m = bp.constraint_count();
  double t = opt.barrier_t0;
  while (*newton_budget > 0) {
    const bool final_stage = m / t <= gap_target;
    const double scale = 1.0 + std::abs(bp.psi(t, z));
    const double tol = final_stage ? std::min(1e-13 * scale, 0.05 * gap_target * gap_target)
                                   : 1e-9 * scale;
    const CenterResult cr = center(bp, t, z, tol, opt.max_newton_per_stage, newton_budget);
    run.steps += cr.steps;
    run.decrement2 = cr.decrement2;
    if (early_stop && early_stop(z)) {
      run.t_final = t;
      run.converged = true;
      return run;
    }
    if (final_stage) {
      run.t_final = t;
      run.converged = !cr.stalled;
      return run;
    }
    if (cr.stalled) {
      run.t_final = t;
      run.converged = false;
      return run;
    }
    t *= opt.barrier_multiplier;
  }
  run.t_final = t;
  run.converged = false;
  return run;
}

}  // namespace

QcqpSolution solve(const QcqpProblem& p, const QcqpOptions& opt,
                   const std::optional<PhaseVector>& start) {
  p.validate();
  const ConvexityReport conv = check_convexity(p);
  if (!conv.all_ok())
    throw std::invalid_argument("qcqp: curvature check failed: " + conv.describe());

  const int n = p.dimension();
  const int nz = 2 * n;
  const double sign = (p.sense == Sense::Maximize) ? -1.0 : 1.0;
  const int mc = static_cast<int>(p.constraints.size());

  QcqpSolution sol;
  sol.slacks.resize(mc);

  auto fill_value_slacks = [&](const PhaseVector& phi) {
    double worst_quad = -kInf;
    for (int j = 0; j < mc; ++j) {
      const auto& con = p.constraints[static_cast<size_t>(j)];
      const double v = con.form.eval(phi) - con.bound;
      worst_quad = std::max(worst_quad, v);
      sol.slacks(j) = (con.direction == Direction::LessEqual) ? -v : v;
    }
    if (p.epigraph) {
      sol.objective = worst_quad;
      for (int j = 0; j < mc; ++j) {
        sol.slacks(j) = worst_quad - (p.constraints[static_cast<size_t>(j)].form.eval(phi) -
                                      p.constraints[static_cast<size_t>(j)].bound);
      }
    } else {
      sol.objective = p.objective.eval(phi);
    }
    sol.min_disk_slack = p.disk_radius;
    for (int i = 0; i < n; ++i)
      sol.min_disk_slack = std::min(sol.min_disk_slack, p.disk_radius - std::abs(phi(i)));
  };

  // Degenerate dimension: everything is a constant.
  if (n == 0) {
    sol.phase = PhaseVector(0);
    fill_value_slacks(sol.phase);
    if (!p.epigraph) {
      for (int j = 0; j < mc; ++j) {
        if (sol.slacks(j) < -opt.feas_tol) {
          sol.status = QcqpStatus::InfeasibleDetected;
          return sol;
        }
      }
    }
    sol.status = QcqpStatus::Optimal;
    return sol;
  }

  // Internal minimize-form constraints g_j <= 0 over the embedded reals.
  const int extra = p.epigraph ? 1 : 0;
  const int ntot = nz + extra;
  Barrier phase2;
  phase2.n_complex = n;
  phase2.ntot = ntot;
  phase2.radius2 = p.disk_radius * p.disk_radius;
  if (p.epigraph) {
    phase2.objective.quad.setZero(0, 0);
    phase2.objective.lin.setZero(ntot);
    phase2.objective.lin(nz) = 0.5;  // objective = alpha
    phase2.objective.cst = 0.0;
  } else {
    phase2.objective = embed(p.objective, sign, ntot);
  }
  for (const auto& con : p.constraints) {
    const double csign = (con.direction == Direction::LessEqual) ? 1.0 : -1.0;
    EForm g = embed(con.form, csign, ntot);
    g.cst -= csign * con.bound;
    if (p.epigraph) g.lin(nz) = -0.5;  // quad - bound - alpha <= 0
    phase2.cons.push_back(std::move(g));
  }

  // Start strictly inside the disks.
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(ntot);
  if (start && start->size() == n) {
    const double lim = p.disk_radius * (1.0 - 1e-9);
    for (int i = 0; i < n; ++i) {
      Complex c = (*start)(i);
      const double a = std::abs(c);
      if (a > lim) c *= lim / a;
      z0(i) = c.real();
      z0(n + i) = c.imag();
    }
  }

  int newton_budget = opt.max_newton_steps;

  if (p.epigraph) {
    // z0(nz) is still zero here, so g.value(z0) is the pure quadratic part.
    double worst = -kInf;
    for (const auto& g : phase2.cons) worst = std::max(worst, g.value(z0));
    z0(nz) = worst + std::max(1.0, 0.1 * std::abs(worst));
  } else {
    // Phase I unless the start already satisfies every quadratic strictly.
    bool strict = true;
    for (const auto& g : phase2.cons) {
      if (!(g.value(z0) < -opt.feas_tol)) {
        strict = false;
        break;
      }
    }
    if (!strict && mc > 0) {
      Barrier phase1;
      phase1.n_complex = n;
      phase1.ntot = nz + 1;
      phase1.radius2 = phase2.radius2;
      phase1.objective.quad.setZero(0, 0);
      phase1.objective.lin.setZero(nz + 1);
      phase1.objective.lin(nz) = 0.5;
      for (const auto& g : phase2.cons) {
        EForm g1 = g;
        g1.lin.conservativeResize(nz + 1);
        g1.lin(nz) = -0.5;  // g(z) - s <= 0
        phase1.cons.push_back(std::move(g1));
      }
      Eigen::VectorXd z1 = Eigen::VectorXd::Zero(nz + 1);
      z1.head(nz) = z0.head(nz);
      double worst = -kInf;
      for (const auto& g : phase2.cons) worst = std::max(worst, g.value(z0));
      z1(nz) = worst + std::max(1.0, 0.1 * std::abs(worst));

      const double threshold = 10.0 * opt.feas_tol;
      auto found = [&](const Eigen::VectorXd& zz) {
        Eigen::VectorXd zfull = Eigen::VectorXd::Zero(ntot);
        zfull.head(nz) = zz.head(nz);
        double w = -kInf;
        for (const auto& g : phase2.cons) w = std::max(w, g.value(zfull));
        return w < -threshold;
      };
      const BarrierRun run1 =
          follow_path(phase1, z1, opt, 0.25 * opt.feas_tol, &newton_budget, found);
      sol.iterations += run1.steps;
      if (!found(z1)) {
        sol.phase = unembed(z1.head(nz), n);
        fill_value_slacks(sol.phase);
        sol.status = QcqpStatus::InfeasibleDetected;
        sol.kkt_residual = kInf;
        sol.duality_gap = kInf;
        return sol;
      }
      z0.head(nz) = z1.head(nz);
    }
  }

  const BarrierRun run = follow_path(phase2, z0, opt, opt.kkt_tol, &newton_budget, nullptr);
  sol.iterations += run.steps;
  sol.phase = unembed(z0.head(nz), n);
  fill_value_slacks(sol.phase);
  sol.duality_gap = phase2.constraint_count() / run.t_final;
  sol.kkt_residual = std::sqrt(std::max(0.0, run.decrement2));
  const bool gap_ok = sol.duality_gap <= opt.kkt_tol;
  const bool kkt_ok = sol.kkt_residual <= opt.kkt_tol;
  sol.status = (gap_ok && kkt_ok) ? QcqpStatus::Optimal : QcqpStatus::MaxIterations;
  return sol;
}

}  // namespace irsmec
