#include "chns/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chns/log.hpp"

namespace chns {

void LambdaTest::validate(const ObstacleInterval& k) const {
  if (!f) throw ConfigError("continuation: Lambda is empty");
  if (f(k.psi1) != 0.0 || f(k.psi2) != 0.0)
    throw ConfigError("continuation: Lambda must vanish at both obstacles");
  const double lo = k.psi1 - 1.0, hi = k.psi2 + 1.0;
  const int n = 2001;
  double prev = f(lo);
  for (int m = 1; m < n; ++m) {
    const double s0 = lo + (hi - lo) * (m - 1) / (n - 1);
    const double s1 = lo + (hi - lo) * m / (n - 1);
    const double cur = f(s1);
    if (std::abs(cur - prev) > lipschitz * (s1 - s0) * (1.0 + 1e-12) + 1e-15)
      throw ConfigError("continuation: Lambda violates its Lipschitz bound");
    prev = cur;
  }
}

LambdaTest lambda_default(const ObstacleInterval& k) {
  return LambdaTest{[k](double s) { return std::min(std::abs(s - k.psi1), std::abs(s - k.psi2)); }, 1.0};
}

double epsilon_inactivity_probe(const CellField& phi, const CellField& lambda,
                                const ObstacleInterval& k, double eps_set_tol) {
  int inside = 0, exceptional = 0;
  for (int c = 0; c < phi.size(); ++c) {
    const double s = phi.values[c];
    if (!(s > k.psi1 && s < k.psi2)) continue;
    ++inside;
    if (std::abs(lambda.values[c]) > eps_set_tol) ++exceptional;
  }
  return inside ? static_cast<double>(exceptional) / inside : 0.0;
}

std::vector<StationarityRow> stationarity_rows(int stage, const Trajectory& traj,
                                               const AdjointTrajectory& adj,
                                               const YosidaPotential& pot, const LambdaTest& lam,
                                               const ContinuationOptions& opts) {
  const auto mult = multiplier_fields(traj, adj, pot);
  const ObstacleInterval& k = pot.interval();
  std::vector<StationarityRow> rows;
  for (int i = 0; i <= traj.M - 1; ++i) {
    const CellField& phi = traj.phi(i);
    const CellField r = adj.r(i - 1);
    CellField L(phi.grid);
    int biactive = 0;
    for (int c = 0; c < phi.size(); ++c) {
      const double s = phi.values[c];
      L.values[c] = lam.f(s);
      if (std::abs(obstacle_excess(s, k)) <= opts.tol_act && pot.gamma_d1(s) > 0.0) ++biactive;
    }
    StationarityRow row;
    row.stage = stage;
    row.alpha = pot.alpha();
    row.i = i;
    row.comp_a_Lambda = std::abs(inner_cc(mult[i].a, L));
    row.comp_lambda_Lambda = std::abs(inner_cc(mult[i].lambda, L));
    row.comp_a_r = std::abs(inner_cc(mult[i].a, r));
    row.sign = inner_cc(mult[i].lambda, r);
    row.r_norm = std::sqrt(inner_cc(r, r));
    const auto viol = obstacle_violation(phi, k);
    row.violation_lo = viol.first;
    row.violation_hi = viol.second;
    row.biactive = static_cast<double>(biactive) / phi.size();
    row.exceptional_share = epsilon_inactivity_probe(phi, mult[i].lambda, k, opts.eps_set_tol);
    rows.push_back(row);
  }
  return rows;
}

StageSummary summarize(int stage, const YosidaPotential& pot, const std::vector<StationarityRow>& rows,
                       const OptimizeResult& opt) {
  StageSummary s;
  s.stage = stage;
  s.alpha = pot.alpha();
  s.theta = pot.theta();
  s.iterations = opt.report.iterations;
  s.converged = opt.report.converged;
  s.objective = opt.best.J;
  s.stationarity = opt.report.stationarity.back();
  s.sign_min = rows.empty() ? 0.0 : rows.front().sign;
  for (const auto& r : rows) {
    s.comp_a_Lambda = std::max(s.comp_a_Lambda, r.comp_a_Lambda);
    if (r.r_norm > 0.0) {
      s.comp_a_r_normalized = std::max(s.comp_a_r_normalized, r.comp_a_r / r.r_norm);
      s.comp_lambda_Lambda_normalized =
          std::max(s.comp_lambda_Lambda_normalized, r.comp_lambda_Lambda / r.r_norm);
    }
    s.sign_min = std::min(s.sign_min, r.sign);
    s.violation_lo = std::max(s.violation_lo, r.violation_lo);
    s.violation_hi = std::max(s.violation_hi, r.violation_hi);
    s.exceptional_share = std::max(s.exceptional_share, r.exceptional_share);
  }
  s.eps = std::max(0.0, -s.sign_min);
  s.min_energy_slack = std::numeric_limits<double>::infinity();
  for (const auto& rep : opt.best.fwd.reports) s.min_energy_slack = std::min(s.min_energy_slack, rep.energy_slack);
  s.collar_ratio = pot.collar_ratio();
  return s;
}

std::vector<StageResult> continuation_run(const Scenario& base, const PotentialFamily& family,
                                          const ControlParams& cp, const ControlSeries& u0,
                                          const LambdaTest& lam, const ContinuationOptions& opts,
                                          StationarityReport& report) {
  family.validate();
  lam.validate(family.interval);
  std::vector<StageResult> out;
  ControlSeries u = u0;
  for (std::size_t n = 0; n < family.schedule.size(); ++n) {
    Scenario sc = base;
    sc.model.pot = family.member(n);
    log_info("continuation stage " + std::to_string(n) + " alpha=" + std::to_string(sc.model.pot.alpha()));
    try {
      StageResult st;
      st.alpha = sc.model.pot.alpha();
      st.opt = optimize(u, sc, cp, opts.optimizer);
      auto rows = stationarity_rows(static_cast<int>(n), st.opt.best.fwd.traj, st.opt.best.adj,
                                    sc.model.pot, lam, opts);
      report.stages.push_back(summarize(static_cast<int>(n), sc.model.pot, rows, st.opt));
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
      u = st.opt.best.u;
      out.push_back(std::move(st));
    } catch (const SolverError& e) {
      report.truncated = true;
      report.failure = "stage " + std::to_string(n) + ": " + e.what();
      break;
    }
  }
  return out;
}

}  // namespace chns
