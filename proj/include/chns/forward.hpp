/// @file forward.hpp
/// @brief Time stepping of the coupled system, energy bookkeeping and initial data.

#pragma once

#include <cstdint>
#include <vector>

#include "chns/physics.hpp"
#include "chns/step_system.hpp"

namespace chns {

/// The known data of step i, read from a trajectory. Index arithmetic lives here only.
StepInputs step_inputs(int i, const Trajectory& traj, const ControlSeries& u);

struct ForwardResult {
  Trajectory traj;
  std::vector<StepReport> reports;  // reports[i+1] belongs to step i = -1 .. M-2
  std::vector<StepSolution> solves;  // same indexing
};

/// Decoupled Cahn-Hilliard step producing (phi_0, mu_0).
StepSolution initial_ch_step(const CellField& phi_a, const FaceField& v_a, const Model& model,
                             const NewtonOptions& opts);

/// Coupled step i producing (phi_{i+1}, mu_{i+1}, v_{i+1}, p_{i+1}).
StepSolution step(int i, const Trajectory& traj, const FaceField& u_next, const Model& model,
                  const NewtonOptions& opts);

/// Runs the whole scheme. Throws ConfigError for inadmissible initial data and
/// SolverError (carrying the step index) on Newton failure.
ForwardResult simulate(const ControlSeries& u, const CellField& phi_a, const FaceField& v_a,
                       const Model& model, const NewtonOptions& opts);

/// Kinetic + interfacial + potential energy E(v, phi, phi_prev).
double energy(const FaceField& v, const CellField& phi, const CellField& phi_prev, const Model& model);
/// Interfacial + potential part only.
double ch_energy(const CellField& phi, const Model& model);

/// Fills the energy, dissipation, increment, work and slack fields of a step report.
void audit_step(int i, const Trajectory& traj, const ControlSeries& u, const Model& model,
                StepReport& rep);

/// Slack of the discrete energy inequality for every step -1 .. M-2.
std::vector<double> energy_audit(const Trajectory& traj, const ControlSeries& u, const Model& model);

// Initial data ----------------------------------------------------------------

/// Seeded uniform noise of the given amplitude with its mean removed.
CellField initial_spinodal(const GridSpec& g, double amplitude, std::uint64_t seed);
/// Two vertical tanh stripes with interface width `width`, mean removed, scaled to `amplitude`.
CellField initial_stripes(const GridSpec& g, double width, double amplitude);
/// Divergence-free face field A (d_y s, -d_x s) of the stream function
/// s = sin^2(pi x/lx) sin^2(pi y/ly), sampled through nodal differences.
FaceField stream_field(const GridSpec& g, double amplitude);

}  // namespace chns
