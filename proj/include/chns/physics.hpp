/// @file physics.hpp
/// @brief Physical parameters, coefficient functions and the time-indexed containers.
///
/// Time indices follow the scheme: phi_{-1} = phi_a is fixed data, the
/// decoupled Cahn-Hilliard step produces (phi_0, mu_0), and coupled step i
/// (i = 0 .. M-2) produces (phi_{i+1}, mu_{i+1}, v_{i+1}, p_{i+1}) driven by u_{i+1}.

#pragma once

#include <string>
#include <vector>

#include "chns/grid.hpp"
#include "chns/potential.hpp"

namespace chns {

/// c0 + c1 tanh(s). Smooth, bounded, with bounded derivatives of all orders.
struct Coefficient {
  double c0 = 1.0;
  double c1 = 0.0;

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
  CellField value(const CellField& f) const;
  CellField d1(const CellField& f) const;
  bool operator==(const Coefficient&) const = default;
};

struct PhysConfig {
  GridSpec grid;
  double rho1 = 1.0;
  double rho2 = 3.0;
  double tau = 1.0;
  int M = 4;
  double mean_shift = 0.0;
  Coefficient mobility{1.0, 0.1};
  Coefficient viscosity{1.0, 0.1};
  /// Bounds b1 <= m, eta and |m|, |eta|, |m'|, |eta'|, |m''|, |eta''| <= b2.
  double b1 = 0.5;
  double b2 = 2.0;

  double beta() const { return 0.5 * (rho2 - rho1); }
  /// Obstacles psi1 = -1 - mean_shift, psi2 = 1 - mean_shift.
  double psi1() const { return -1.0 - mean_shift; }
  double psi2() const { return 1.0 - mean_shift; }

  /// Throws ConfigError naming the offending key.
  void validate() const;
  bool operator==(const PhysConfig&) const = default;
};

/// Clamped affine density max((rho1+rho2)/2 + beta (phi + mean_shift), 0).
double density(double phi, const PhysConfig& cfg);
/// Derivative of the unclamped branch; 0 where the clamp is active.
double density_d1(double phi, const PhysConfig& cfg);
/// Field version; clamp_count receives the number of cells where the clamp is active.
CellField density(const CellField& phi, const PhysConfig& cfg, int* clamp_count = nullptr);
CellField density_d1(const CellField& phi, const PhysConfig& cfg);

/// Controls u_1 .. u_{M-1}. Boundary faces are always zero.
struct ControlSeries {
  GridSpec grid;
  std::vector<FaceField> u;  // u[k-1] = u_k

  ControlSeries() = default;
  ControlSeries(const GridSpec& g, int M);

  int count() const { return static_cast<int>(u.size()); }
  FaceField& at(int k);
  const FaceField& at(int k) const;

  Eigen::VectorXd flat() const;
  static ControlSeries from_flat(const GridSpec& g, int M, const Eigen::VectorXd& x);
};

double inner(const ControlSeries& a, const ControlSeries& b);

struct Trajectory {
  GridSpec grid;
  int M = 0;
  std::vector<CellField> phi_;   // phi_{-1} .. phi_{M-1}
  std::vector<CellField> mu_;    // mu_0 .. mu_{M-1}
  std::vector<FaceField> vel_;   // v_0 .. v_{M-1}
  std::vector<CellField> pres_;  // p_1 .. p_{M-1}; slot 0 unused

  Trajectory() = default;
  Trajectory(const GridSpec& g, int M);

  CellField& phi(int i);
  const CellField& phi(int i) const;
  CellField& mu(int i);
  const CellField& mu(int i) const;
  FaceField& vel(int i);
  const FaceField& vel(int i) const;
  CellField& pres(int i);
  const CellField& pres(int i) const;
};

/// Per-step diagnostics. Step -1 is the decoupled Cahn-Hilliard step.
struct StepReport {
  int step = -1;
  int newton_iters = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double dissipation_visc = 0.0;
  double dissipation_mob = 0.0;
  double increment_terms = 0.0;
  double control_work = 0.0;
  double energy_slack = 0.0;
  double mass_drift = 0.0;
  double div_inf = 0.0;
  double violation_lo = 0.0;
  double violation_hi = 0.0;
  int density_clamps = 0;
};

}  // namespace chns
