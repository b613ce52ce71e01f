/// @file continuation.hpp
/// @brief Path following in the Yosida parameter and limiting stationarity residuals.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chns/control.hpp"

namespace chns {

/// Lipschitz test function with zeros at both obstacles.
struct LambdaTest {
  std::function<double(double)> f;
  double lipschitz = 1.0;

  /// Throws ConfigError unless f(psi1) = f(psi2) = 0 and the Lipschitz bound
  /// holds on a sample of the interval widened by one unit each side.
  void validate(const ObstacleInterval& k) const;
};

/// Lambda(s) = min(|s - psi1|, |s - psi2|).
LambdaTest lambda_default(const ObstacleInterval& k);

/// Per stage and time index i = 0 .. M-1.
struct StationarityRow {
  int stage = 0;
  double alpha = 0.0;
  int i = 0;
  double comp_a_Lambda = 0.0;       // |<a_i, Lambda(phi_i)>|
  double comp_lambda_Lambda = 0.0;  // |<lambda_i, Lambda(phi_i)>|
  double comp_a_r = 0.0;            // |<a_i, r_{i-1}>|
  double sign = 0.0;                // <lambda_i, r_{i-1}>, unclipped
  double r_norm = 0.0;              // |r_{i-1}|
  double violation_lo = 0.0;
  double violation_hi = 0.0;
  double biactive = 0.0;
  double exceptional_share = 0.0;
};

struct StageSummary {
  int stage = 0;
  double alpha = 0.0;
  double theta = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double stationarity = 0.0;
  double comp_a_Lambda = 0.0;          // max over i
  double comp_a_r_normalized = 0.0;    // max over i of |<a, r>| / |r|
  double comp_lambda_Lambda_normalized = 0.0;
  double sign_min = 0.0;
  double eps = 0.0;                    // max(0, -sign_min)
  double violation_lo = 0.0;
  double violation_hi = 0.0;
  double min_energy_slack = 0.0;
  double collar_ratio = 0.0;
  double exceptional_share = 0.0;      // max over i
};

struct StationarityReport {
  std::vector<StationarityRow> rows;
  std::vector<StageSummary> stages;
  bool truncated = false;
  std::string failure;
};

struct ContinuationOptions {
  double tol_act = 1e-3;
  double eps_set_tol = 1e-8;
  OptimizeOptions optimizer;
};

struct StageResult {
  double alpha = 0.0;
  OptimizeResult opt;
};

/// Fraction of the strictly interior cells psi1 < phi < psi2 with |lambda| > eps_set_tol.
double epsilon_inactivity_probe(const CellField& phi, const CellField& lambda,
                                const ObstacleInterval& k, double eps_set_tol);

/// Residual rows for one stage.
std::vector<StationarityRow> stationarity_rows(int stage, const Trajectory& traj,
                                               const AdjointTrajectory& adj,
                                               const YosidaPotential& pot, const LambdaTest& lam,
                                               const ContinuationOptions& opts);

StageSummary summarize(int stage, const YosidaPotential& pot, const std::vector<StationarityRow>& rows,
                       const OptimizeResult& opt);

/// Optimizes along the schedule with warm starts. A failing stage truncates the report.
std::vector<StageResult> continuation_run(const Scenario& base, const PotentialFamily& family,
                                          const ControlParams& cp, const ControlSeries& u0,
                                          const LambdaTest& lam, const ContinuationOptions& opts,
                                          StationarityReport& report);

}  // namespace chns
