/// @file step_system.hpp
/// @brief One time step of the scheme as a nonlinear algebraic system F(x) = 0.
///
/// Coupled step i (i >= 0) solves for x = [phi, mu, c, v, p, lambda] with
///   (a) (phi - phi_i)/tau + I_fc(v * G phi_i) - Div(m_f(phi_i) * G mu)        = 0
///   (b) -Lap phi + gamma~(phi) - mu - kappa phi_i - c                           = 0
///   (b') sum mu                                                                 = 0
///   (c) rho_f(phi_i) v/tau - rho_f(phi_{i-1}) v_i/tau + D(nu_i) v
///       + E^T(2 eta_t(phi_i) E v) + G p - I_cf(mu) * G phi_i - u_{i+1}          = 0
///   (d) Div v + lambda                                                          = 0
///   (d') sum p                                                                  = 0
/// with nu_i = rho_f(phi_{i-1}) v_i - beta m_f(phi_{i-1}) G mu_i. Rows (c) on
/// boundary faces are replaced by v = 0. The constant c is the multiplier of
/// the zero-mean constraint on mu; summing (d) over cells forces lambda = 0.
///
/// The initial step (index -1) keeps only [phi, mu, c] and rows (a), (b), (b')
/// with phi_i = phi_a and the transport velocity fixed to v_a.
///
/// Every row is multiplied by the cell measure, so F is the gradient-form
/// residual and transposes of its Jacobians are the discrete adjoints.

#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "chns/operators.hpp"
#include "chns/physics.hpp"
#include "chns/potential.hpp"

namespace chns {

struct Model {
  PhysConfig phys;
  YosidaPotential pot;

  const GridSpec& grid() const { return phys.grid; }
};

/// Known data entering step `index`.
struct StepInputs {
  int index = -1;
  CellField phi_cur;  // phi_i, or phi_a for the initial step
  CellField phi_old;  // phi_{i-1}; unused for the initial step
  CellField mu_cur;   // mu_i; unused for the initial step
  FaceField v_cur;    // v_i; v_a for steps -1 and 0
  FaceField u_next;   // u_{i+1}; unused for the initial step
};

struct StepLayout {
  int C = 0;
  int F = 0;
  bool coupled = false;

  int phi() const { return 0; }
  int mu() const { return C; }
  int c() const { return 2 * C; }
  int v() const { return 2 * C + 1; }
  int p() const { return 2 * C + 1 + F; }
  int lam() const { return 3 * C + 1 + F; }
  int size() const { return coupled ? 3 * C + F + 2 : 2 * C + 1; }
};

/// Partial Jacobians of F_i with respect to earlier unknowns (size() rows).
struct StepCoupling {
  SpMat d_phi_cur;  // w.r.t. phi_i
  SpMat d_mu_cur;   // w.r.t. mu_i
  SpMat d_v_cur;    // w.r.t. v_i
  SpMat d_phi_old;  // w.r.t. phi_{i-1}
  SpMat d_u_next;   // w.r.t. u_{i+1}
};

class StepSystem {
 public:
  StepSystem(const Model& model, StepInputs in);

  const StepLayout& layout() const { return lay_; }
  const StepInputs& inputs() const { return in_; }
  const Model& model() const { return model_; }
  int size() const { return lay_.size(); }

  /// Weighted residual F(x).
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  /// max |F| / cell measure.
  double residual_norm(const Eigen::VectorXd& x) const;
  SpMat jacobian(const Eigen::VectorXd& x) const;
  /// Tangent J(x) dx evaluated with the field operators, no matrices.
  Eigen::VectorXd apply_jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const;

  /// Partial Jacobians w.r.t. earlier states at the solution x (coupled steps only).
  StepCoupling coupling(const Eigen::VectorXd& x) const;

  Eigen::VectorXd pack(const CellField& phi, const CellField& mu, const FaceField* v,
                       const CellField* p) const;
  CellField phi(const Eigen::VectorXd& x) const;
  CellField mu(const Eigen::VectorXd& x) const;
  FaceField vel(const Eigen::VectorXd& x) const;
  CellField pres(const Eigen::VectorXd& x) const;

  /// The flux nu_i of the convection term (zero for the initial step).
  const FaceField& flux() const { return nu_; }

 private:
  void assemble_linear();

  Model model_;
  StepInputs in_;
  StepLayout lay_;
  double w_ = 1.0;
  FaceField nu_;
  FaceField mf_;         // m_f(phi_i)
  FaceField gphi_;       // G phi_i
  FaceField rhof_cur_;   // rho_f(phi_i)
  FaceField rhof_old_;   // rho_f(phi_{i-1})
  Eigen::VectorXd eta_t_;
  SpMat A_;
  Eigen::VectorXd b_;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iters = 50;
  bool line_search = false;
  int max_halvings = 10;
  /// One extra Newton correction after the tolerance is met.
  bool polish = true;
  bool operator==(const NewtonOptions&) const = default;
};

/// Converged step with the last factorization kept for the adjoint sweep.
struct StepSolution {
  Eigen::VectorXd x;
  int iters = 0;
  std::vector<double> history;
  double residual = 0.0;
  SpMat jacobian;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu;
};

/// Newton iteration from x0. Throws SolverError / LinearAlgebraError.
StepSolution newton_solve(const StepSystem& sys, Eigen::VectorXd x0, const NewtonOptions& opts);

}  // namespace chns
