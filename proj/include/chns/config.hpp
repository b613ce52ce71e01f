/// @file config.hpp
/// @brief Run configuration: JSON sections with documented defaults and strict keys.
///
/// An empty file (or "{}") yields the defaults below. Unknown keys and
/// invalid values raise ConfigError naming the key, e.g. "time.tau".

#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "chns/continuation.hpp"

namespace chns {

struct InitialSection {
  std::string phi = "spinodal";  // spinodal | stripes | zero
  double amplitude = 0.05;       // noise amplitude, or stripe scale
  double width = 0.5;            // stripe interface width
  std::string velocity = "zero";  // zero | stream
  double velocity_amplitude = 0.0;
  std::string control = "zero";  // zero | stream: control used by simulate/energycheck/gradcheck
  double control_amplitude = 0.0;
  bool operator==(const InitialSection&) const = default;
};

struct PotentialSection {
  ObstacleInterval interval;
  double alpha0 = 0.2;
  double alpha_factor = 0.5;
  int n_stages = 4;
  ThetaRule theta_rule;
  bool operator==(const PotentialSection&) const = default;
};

struct ObjectiveSection {
  std::string target = "zero";  // zero | initial | known_control
  double target_amplitude = 0.5;  // amplitude of the known stream control
  /// Schedule member whose potential generates a known_control target.
  int target_stage = 0;
  /// Project the generated target onto [psi1, psi2] (then remove its mean).
  bool target_project = false;
  double xi = 1e-4;
  /// Uniform box; +-infinity (JSON null) means unbounded.
  double box_lower = -std::numeric_limits<double>::infinity();
  double box_upper = std::numeric_limits<double>::infinity();
  bool operator==(const ObjectiveSection&) const = default;
};

struct ContinuationSection {
  double tol_act = 1e-3;
  double eps_set_tol = 1e-8;
  /// Required first-to-last shrink factor of the normalized residuals; 0 disables the audit.
  double decay_factor = 0.0;
  bool operator==(const ContinuationSection&) const = default;
};

struct GradcheckSection {
  int directions = 10;
  double step = 1e-5;
  double tolerance = 1e-5;
  double transpose_tolerance = 1e-13;
  bool operator==(const GradcheckSection&) const = default;
};

struct AuditSection {
  double slack_tol = 1e-8;
  double mass_tol = 1e-12;
  double div_tol = 1e-10;
  bool snapshots = true;
  bool operator==(const AuditSection&) const = default;
};

struct RunConfig {
  PhysConfig physics;  // includes grid and time
  PotentialSection potential;
  InitialSection initial;
  NewtonOptions solver;
  ObjectiveSection objective;
  OptimizeOptions optimizer;
  ContinuationSection continuation;
  GradcheckSection gradcheck;
  AuditSection audit;
  std::uint64_t seed = 20240601;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical JSON text (all keys, sorted); parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& c);
/// FNV-1a 64 of serialize(c), as 16 hex digits.
std::string config_hash(const RunConfig& c);

// Scenario construction -------------------------------------------------------

/// Model with the first member of the alpha schedule.
Model make_model(const RunConfig& c);
Scenario make_scenario(const RunConfig& c);
PotentialFamily make_family(const RunConfig& c);
/// Control of initial.control, constant in time.
ControlSeries make_control(const RunConfig& c);
/// The known control used to generate a reachable target.
ControlSeries make_target_control(const RunConfig& c);
/// Tracking data; may run the forward model for known_control targets.
ControlParams make_control_params(const RunConfig& c, const Scenario& sc);

}  // namespace chns
