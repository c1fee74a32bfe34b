#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irsmec/types.hpp"

namespace irsmec {

/// Real-valued quadratic functional of a complex vector:
/// eval(phi) = phi^H matrix phi + 2 Re(linear^H phi) + constant,
/// with `matrix` Hermitian.
struct QuadraticForm {
  CMatrix matrix;   // Hermitian
  CVector linear;
  double constant = 0.0;

  double eval(const PhaseVector& phi) const;
  int dimension() const { return static_cast<int>(linear.size()); }
};

enum class Sense { Minimize, Maximize };
enum class Direction { LessEqual, GreaterEqual };

struct QcqpConstraint {
  QuadraticForm form;
  double bound = 0.0;
  Direction direction = Direction::LessEqual;
};

/// Quadratically constrained quadratic program over a complex vector with
/// per-element disk constraints |phi_n| <= disk_radius.
///
/// With epigraph set, the objective field is ignored and the problem is
/// the minimax  min_phi max_j (form_j(phi) - bound_j)  over the disks;
/// every constraint must then have direction LessEqual.
struct QcqpProblem {
  QuadraticForm objective;
  Sense sense = Sense::Minimize;
  std::vector<QcqpConstraint> constraints;
  double disk_radius = 1.0;
  bool epigraph = false;

  int dimension() const;
  /// Structural checks (dimensions, radius, epigraph shape). Curvature is
  /// checked separately by check_convexity.
  void validate() const;
};

/// Sign of the minimum eigenvalue of each form against what the problem
/// sense and constraint directions require, with tolerance
/// 1e-8 * max(1, |largest eigenvalue|).
struct ConvexityReport {
  bool objective_ok = true;
  std::vector<bool> constraint_ok;
  bool all_ok() const;
  std::string describe() const;
};

ConvexityReport check_convexity(const QcqpProblem& problem);

struct QcqpOptions {
  double kkt_tol = 1e-7;          // duality-gap and stationarity target
  double feas_tol = 1e-8;         // phase-I infeasibility threshold
  double barrier_t0 = 1.0;
  double barrier_multiplier = 10.0;
  int max_newton_steps = 5000;    // total across all centerings
  int max_newton_per_stage = 80;
};

enum class QcqpStatus { Optimal, InfeasibleDetected, MaxIterations };

struct QcqpSolution {
  PhaseVector phase;        // argmin / argmax
  double objective = 0.0;   // original-sense value at phase
  RVector slacks;           // per quadratic constraint, >= 0 when satisfied
  double min_disk_slack = 0.0;
  // Residual of the barrier-perturbed KKT system at termination, measured
  // as the Newton decrement of the final centering.
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;       // Newton steps, both phases
  QcqpStatus status = QcqpStatus::Optimal;
};

/// Log-barrier interior-point solve. Throws std::invalid_argument when the
/// problem is structurally malformed or fails the convexity check. A start
/// point, when given, is pulled strictly inside the disks and used to skip
/// phase I whenever it is strictly feasible. Deterministic.
QcqpSolution solve(const QcqpProblem& problem, const QcqpOptions& options = {},
                   const std::optional<PhaseVector>& start = std::nullopt);

}  // namespace irsmec
