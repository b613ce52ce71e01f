/// @file adjoint.hpp
/// @brief Backward sweep with the transposed step Jacobians, reduced gradient, multipliers.
///
/// With F_k the weighted residual of step k and X_k its unknowns, the sweep
/// solves for k = M-2 .. -1
///
///   J_k^T y_k = -( dJ/dX_k + (dF_{k+1}/dX_k)^T y_{k+1} + (dF_{k+2}/dX_k)^T y_{k+2} ).
///
/// The blocks of y_k that multiply rows (a), (b), (c) and (d) of step k are
/// the adjoint fields p_k, r_k, q_k and the adjoint pressure.

#pragma once

#include <map>
#include <vector>

#include "chns/forward.hpp"

namespace chns {

struct AdjointTrajectory {
  GridSpec grid;
  int M = 0;
  std::vector<Eigen::VectorXd> y;       // y[k+1] for step k = -1 .. M-2
  std::vector<CellField> p_, r_;        // slot i+1 for i = -1 .. M-2
  std::vector<FaceField> q_;            // slot i for i = 0 .. M-2
  std::vector<CellField> pres_;         // slot i for i = 0 .. M-2

  /// Zero for i >= M-1 (and q_{-1} = 0).
  CellField p(int i) const;
  CellField r(int i) const;
  FaceField q(int i) const;
  CellField pressure(int i) const;
};

/// Partial derivatives of the objective in L2 (Riesz) form. Missing entries are zero.
struct ObjectiveGradient {
  std::map<int, CellField> dphi;  // i = 0 .. M-1
  std::map<int, CellField> dmu;   // i = 0 .. M-1
  std::map<int, FaceField> dv;    // i = 1 .. M-1
};

/// Runs the backward sweep. When `fwd` carries the forward factorizations they
/// are reused; otherwise each step Jacobian is rebuilt and factorized.
AdjointTrajectory adjoint_sweep(const Trajectory& traj, const ControlSeries& u,
                                const ObjectiveGradient& obj, const Model& model,
                                const ForwardResult* fwd = nullptr);

/// g_k = xi u_k - q_{k-1} restricted to interior faces, k = 1 .. M-1.
ControlSeries reduced_gradient(const ControlSeries& u, const AdjointTrajectory& adj, double xi);

struct MultiplierField {
  CellField a;       // gamma~(phi_i)
  CellField lambda;  // gamma~'(phi_i) r_{i-1}
};

/// Entries i = 0 .. M-1.
std::vector<MultiplierField> multiplier_fields(const Trajectory& traj, const AdjointTrajectory& adj,
                                               const YosidaPotential& pot);

}  // namespace chns
