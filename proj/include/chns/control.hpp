/// @file control.hpp
/// @brief Tracking objective, box-constrained admissible set, projected-gradient solver.

#pragma once

#include <string>
#include <vector>

#include "chns/adjoint.hpp"
#include "chns/errors.hpp"

namespace chns {

/// Fixed problem data: model, initial state and Newton settings.
struct Scenario {
  Model model;
  CellField phi_a;
  FaceField v_a;
  NewtonOptions newton;
};

/// Per-face bounds, identical for every control index. Boundary faces are pinned to 0.
struct ControlBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static ControlBox uniform(const GridSpec& g, double lo, double hi);
  bool bounded() const;
  /// Throws ConfigError when lower > upper anywhere.
  void validate() const;
};

struct ControlParams {
  CellField phi_d;
  double xi = 1e-4;
  ControlBox box;

  /// Requires a mean-free phi_d, xi >= 0, a consistent box, and xi > 0 or a bounded box.
  void validate() const;
};

/// 1/2 |phi_{M-1} - phi_d|^2 + xi/2 |u|^2.
double objective(const Trajectory& traj, const ControlSeries& u, const ControlParams& cp);
/// Partial derivatives of the objective with respect to the state.
ObjectiveGradient objective_state_gradient(const Trajectory& traj, const ControlParams& cp);

ControlSeries project_Uad(const ControlSeries& u, const ControlParams& cp);
/// Weighted L2 norm of u - P(u - g).
double stationarity(const ControlSeries& u, const ControlSeries& g, const ControlParams& cp);

struct OptimizeOptions {
  double tol_stat = 1e-6;
  int max_iters = 500;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  double initial_step = 1.0;
  bool bb_step = true;
  bool operator==(const OptimizeOptions&) const = default;
};

struct OptimizeReport {
  int iterations = 0;
  std::vector<double> objective;     // per accepted iterate, starting at u0
  std::vector<double> stationarity;  // same indexing
  std::vector<double> step_length;   // step accepted to reach the iterate (0 for u0)
  std::vector<int> backtracks;
  bool converged = false;
  std::string stop_reason;
};

/// Solution, state and adjoint evaluated at a control.
struct Evaluation {
  ControlSeries u;
  ForwardResult fwd;
  double J = 0.0;
  AdjointTrajectory adj;
  ControlSeries grad;
};

Evaluation evaluate(const ControlSeries& u, const Scenario& sc, const ControlParams& cp,
                    bool with_gradient = true);

struct OptimizeResult {
  Evaluation best;
  OptimizeReport report;
};

/// Raised when Armijo backtracking gives up; carries the report so far.
class OptimizerStagnation : public SolverError {
 public:
  OptimizerStagnation(const std::string& what, OptimizeReport rep)
      : SolverError(what), report(std::move(rep)) {}
  OptimizeReport report;
};

OptimizeResult optimize(const ControlSeries& u0, const Scenario& sc, const ControlParams& cp,
                        const OptimizeOptions& opts);

}  // namespace chns
