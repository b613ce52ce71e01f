#include "chns/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "chns/errors.hpp"
#include "chns/field_io.hpp"
#include "chns/log.hpp"

namespace chns {

namespace fs = std::filesystem;

std::string RunResult::line() const {
  std::string r = reason;
  std::replace(r.begin(), r.end(), '\n', ' ');
  return "status=" + status + " code=" + std::to_string(code) + (r.empty() ? "" : " reason=" + r);
}

namespace {

/// Audit failure carrying a reason; collected rather than thrown mid-run.
struct Audit {
  std::vector<std::string> failures;
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

class Csv {
 public:
  Csv(const fs::path& file, const std::string& header) : os_(file) {
    if (!os_) throw Error("cannot write " + file.string());
    os_ << header << '\n';
  }
  template <class... Ts>
  void row(const Ts&... xs) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(xs), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string& s) { return s; }
  std::ofstream os_;
};

std::string num(double x) { return fmt(x); }

void write_trajectory(const fs::path& dir, const Trajectory& traj) {
  fs::create_directories(dir);
  for (int i = -1; i <= traj.M - 1; ++i) write_cell_snapshot(dir, "phi", i, traj.phi(i));
  for (int i = 0; i <= traj.M - 1; ++i) {
    write_cell_snapshot(dir, "mu", i, traj.mu(i));
    write_face_csv(dir, "v", i, traj.vel(i));
  }
  for (int i = 1; i <= traj.M - 1; ++i) write_cell_snapshot(dir, "p", i, traj.pres(i));
}

void write_control(const fs::path& dir, const ControlSeries& u) {
  fs::create_directories(dir);
  for (int k = 1; k <= u.count(); ++k) write_face_csv(dir, "u", k, u.at(k));
}

void write_reports(const fs::path& file, const std::vector<StepReport>& reps) {
  Csv csv(file, "step,newton_iters,residual,energy,slack,mass_drift,div_inf,violation_lo,violation_hi");
  for (const auto& r : reps)
    csv.row(r.step, r.newton_iters, r.final_residual, r.energy_after, r.energy_slack, r.mass_drift,
            r.div_inf, r.violation_lo, r.violation_hi);
}

/// Mass, divergence and (optionally) energy audits over the step reports.
void audit_reports(const std::vector<StepReport>& reps, const RunConfig& cfg, bool slack, Audit& audit,
                   RunResult& res) {
  double mass = 0.0, div = 0.0, min_slack = std::numeric_limits<double>::infinity();
  int clamps = 0;
  for (const auto& r : reps) {
    mass = std::max(mass, r.mass_drift);
    if (r.step >= 0) div = std::max(div, r.div_inf);
    min_slack = std::min(min_slack, r.energy_slack);
    clamps += r.density_clamps;
    audit.check(r.mass_drift <= cfg.audit.mass_tol,
                "mass_drift step=" + std::to_string(r.step) + " value=" + num(r.mass_drift));
    if (r.step >= 0)
      audit.check(r.div_inf <= cfg.audit.div_tol,
                  "div_inf step=" + std::to_string(r.step) + " value=" + num(r.div_inf));
    if (slack)
      audit.check(r.energy_slack >= -cfg.audit.slack_tol,
                  "energy_slack step=" + std::to_string(r.step) + " value=" + num(r.energy_slack));
  }
  res.metrics["max_mass_drift"] = mass;
  res.metrics["max_div_inf"] = div;
  res.metrics["min_energy_slack"] = min_slack;
  res.metrics["density_clamps"] = clamps;
  if (clamps > 0) log_info("density clamp active: run is outside the obstacle regime");
}

void run_simulate(const RunConfig& cfg, const fs::path& out, bool energy, Audit& audit, RunResult& res) {
  const Scenario sc = make_scenario(cfg);
  const ControlSeries u = make_control(cfg);
  const ForwardResult f = simulate(u, sc.phi_a, sc.v_a, sc.model, sc.newton);
  write_reports(out / "reports.csv", f.reports);
  if (cfg.audit.snapshots) write_trajectory(out / "snapshots", f.traj);
  if (energy) {
    Csv csv(out / "energy.csv",
            "step,energy_before,energy_after,dissipation_visc,dissipation_mob,increment_terms,"
            "control_work,slack");
    for (const auto& r : f.reports)
      csv.row(r.step, r.energy_before, r.energy_after, r.dissipation_visc, r.dissipation_mob,
              r.increment_terms, r.control_work, r.energy_slack);
  }
  audit_reports(f.reports, cfg, energy, audit, res);
}

void run_gradcheck(const RunConfig& cfg, const fs::path& out, Audit& audit, RunResult& res) {
  const Scenario sc = make_scenario(cfg);
  const ControlParams cp = make_control_params(cfg, sc);
  const GridSpec& g = cfg.physics.grid;
  const int M = cfg.physics.M;
  const ControlSeries u = make_control(cfg);
  const Evaluation ev = evaluate(u, sc, cp, true);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_series = [&] {
    Eigen::VectorXd d(u.flat().size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      const double z = normal(rng);
      d[k] = g.face_on_boundary(static_cast<int>(k % g.faces())) ? 0.0 : z;
    }
    return ControlSeries::from_flat(g, M, d);
  };

  const double h = cfg.gradcheck.step;
  double worst = 0.0;
  {
    Csv csv(out / "gradcheck.csv", "direction,adjoint,finite_difference,relative_error");
    for (int n = 0; n < cfg.gradcheck.directions; ++n) {
      const ControlSeries d = random_series();
      const Eigen::VectorXd uf = u.flat(), df = d.flat();
      const double jp = evaluate(ControlSeries::from_flat(g, M, uf + h * df), sc, cp, false).J;
      const double jm = evaluate(ControlSeries::from_flat(g, M, uf - h * df), sc, cp, false).J;
      const double fd = (jp - jm) / (2.0 * h);
      const double ad = inner(ev.grad, d);
      const double scale = std::max({std::abs(ad), std::abs(fd), 1e-300});
      const double rel = std::abs(ad - fd) / scale;
      worst = std::max(worst, rel);
      csv.row(n, ad, fd, rel);
    }
  }
  res.metrics["max_relative_error"] = worst;
  audit.check(worst <= cfg.gradcheck.tolerance, "gradcheck max_relative_error=" + num(worst));

  // Matrix-free tangent against the transposed assembled Jacobian, per step.
  double worst_t = 0.0;
  {
    Csv csv(out / "transpose.csv", "step,lhs,rhs,relative_error");
    for (int k = -1; k <= M - 2; ++k) {
      const StepSystem sys(sc.model, step_inputs(k, ev.fwd.traj, u));
      const Eigen::VectorXd& x = ev.fwd.solves[k + 1].x;
      Eigen::VectorXd dx(sys.size()), y(sys.size());
      for (int m = 0; m < sys.size(); ++m) dx[m] = normal(rng);
      for (int m = 0; m < sys.size(); ++m) y[m] = normal(rng);
      const Eigen::VectorXd jx = sys.apply_jacobian(x, dx);
      const Eigen::VectorXd jty = sys.jacobian(x).transpose() * y;
      const double lhs = jx.dot(y), rhs = dx.dot(jty);
      const double rel = std::abs(lhs - rhs) / (jx.norm() * y.norm());
      worst_t = std::max(worst_t, rel);
      csv.row(k, lhs, rhs, rel);
    }
  }
  res.metrics["max_transpose_error"] = worst_t;
  audit.check(worst_t <= cfg.gradcheck.transpose_tolerance, "transpose max_relative_error=" + num(worst_t));
}

void write_optimize_report(const fs::path& file, const OptimizeReport& r) {
  Csv csv(file, "iteration,objective,stationarity,step_length,backtracks");
  for (std::size_t k = 0; k < r.objective.size(); ++k)
    csv.row(static_cast<int>(k), r.objective[k], r.stationarity[k], r.step_length[k], r.backtracks[k]);
}

void audit_optimize(const OptimizeReport& r, const RunConfig& cfg, Audit& audit, RunResult& res,
                    const std::string& tag) {
  bool monotone = true;
  for (std::size_t k = 1; k < r.objective.size(); ++k) monotone = monotone && r.objective[k] <= r.objective[k - 1];
  res.metrics[tag + "iterations"] = r.iterations;
  res.metrics[tag + "objective_initial"] = r.objective.front();
  res.metrics[tag + "objective_final"] = r.objective.back();
  res.metrics[tag + "stationarity_final"] = r.stationarity.back();
  audit.check(monotone, tag + "objective not monotone");
  audit.check(r.stationarity.back() <= cfg.optimizer.tol_stat,
              tag + "stationarity=" + num(r.stationarity.back()) + " stop=" + r.stop_reason);
}

void run_optimize(const RunConfig& cfg, const fs::path& out, Audit& audit, RunResult& res) {
  const Scenario sc = make_scenario(cfg);
  const ControlParams cp = make_control_params(cfg, sc);
  const ControlSeries u0(cfg.physics.grid, cfg.physics.M);
  try {
    const OptimizeResult r = optimize(u0, sc, cp, cfg.optimizer);
    write_optimize_report(out / "optimize_report.csv", r.report);
    if (cfg.audit.snapshots) {
      write_control(out / "snapshots", r.best.u);
      write_trajectory(out / "snapshots", r.best.fwd.traj);
    }
    audit_optimize(r.report, cfg, audit, res, "");
    res.metrics["objective_ratio"] = r.report.objective.back() / r.report.objective.front();
  } catch (const OptimizerStagnation& e) {
    write_optimize_report(out / "optimize_report.csv", e.report);
    throw;
  }
}

void run_continue(const RunConfig& cfg, const fs::path& out, Audit& audit, RunResult& res) {
  const Scenario sc = make_scenario(cfg);
  const ControlParams cp = make_control_params(cfg, sc);
  const PotentialFamily fam = make_family(cfg);
  ContinuationOptions opts;
  opts.tol_act = cfg.continuation.tol_act;
  opts.eps_set_tol = cfg.continuation.eps_set_tol;
  opts.optimizer = cfg.optimizer;
  StationarityReport rep;
  const auto stages = continuation_run(sc, fam, cp, ControlSeries(cfg.physics.grid, cfg.physics.M),
                                       lambda_default(fam.interval), opts, rep);
  {
    Csv csv(out / "stationarity.csv",
            "stage,alpha,i,comp_a_Lambda,comp_lambda_Lambda,comp_a_r,sign,r_norm,violation_lo,"
            "violation_hi,biactive,exceptional_share");
    for (const auto& r : rep.rows)
      csv.row(r.stage, r.alpha, r.i, r.comp_a_Lambda, r.comp_lambda_Lambda, r.comp_a_r, r.sign, r.r_norm,
              r.violation_lo, r.violation_hi, r.biactive, r.exceptional_share);
  }
  {
    Csv csv(out / "stages.csv",
            "stage,alpha,theta,iterations,converged,objective,stationarity,comp_a_Lambda,"
            "comp_a_r_normalized,comp_lambda_Lambda_normalized,sign_min,eps,violation_lo,violation_hi,"
            "min_energy_slack,collar_ratio,exceptional_share");
    for (const auto& s : rep.stages)
      csv.row(s.stage, s.alpha, s.theta, s.iterations, s.converged, s.objective, s.stationarity,
              s.comp_a_Lambda, s.comp_a_r_normalized, s.comp_lambda_Lambda_normalized, s.sign_min, s.eps,
              s.violation_lo, s.violation_hi, s.min_energy_slack, s.collar_ratio, s.exceptional_share);
  }
  for (std::size_t n = 0; n < stages.size(); ++n) {
    const fs::path dir = out / ("stage" + std::to_string(n));
    write_optimize_report(out / ("optimize_report_stage" + std::to_string(n) + ".csv"), stages[n].opt.report);
    if (cfg.audit.snapshots) {
      write_control(dir, stages[n].opt.best.u);
      write_trajectory(dir, stages[n].opt.best.fwd.traj);
    }
  }
  if (rep.truncated) throw SolverError("continuation truncated: " + rep.failure);

  const auto& S = rep.stages;
  for (std::size_t n = 0; n < S.size(); ++n) {
    const std::string tag = "stage" + std::to_string(n);
    audit.check(S[n].converged, tag + " optimizer did not converge stationarity=" + num(S[n].stationarity));
    audit.check(S[n].min_energy_slack >= -cfg.audit.slack_tol,
                tag + " energy_slack=" + num(S[n].min_energy_slack));
    if (n == 0) continue;
    audit.check(S[n].violation_lo <= S[n - 1].violation_lo, tag + " violation_lo increased");
    audit.check(S[n].violation_hi <= S[n - 1].violation_hi, tag + " violation_hi increased");
    audit.check(S[n].eps <= S[n - 1].eps, tag + " eps increased");
  }
  const StageSummary& a = S.front();
  const StageSummary& b = S.back();
  auto ratio = [](double first, double last) { return last > 0.0 ? first / last : (first > 0.0 ? INFINITY : 0.0); };
  const double r1 = ratio(a.comp_a_Lambda, b.comp_a_Lambda);
  const double r2 = ratio(a.comp_a_r_normalized, b.comp_a_r_normalized);
  const double r3 = ratio(a.comp_lambda_Lambda_normalized, b.comp_lambda_Lambda_normalized);
  res.metrics["decay_a_Lambda"] = r1;
  res.metrics["decay_a_r"] = r2;
  res.metrics["decay_lambda_Lambda"] = r3;
  res.metrics["violation_hi_first"] = a.violation_hi;
  res.metrics["violation_hi_last"] = b.violation_hi;
  res.metrics["eps_first"] = a.eps;
  res.metrics["eps_last"] = b.eps;
  const double d = cfg.continuation.decay_factor;
  if (d > 0.0) {
    audit.check(r1 >= d, "decay a_Lambda=" + num(r1));
    audit.check(r2 >= d, "decay a_r=" + num(r2));
    audit.check(r3 >= d, "decay lambda_Lambda=" + num(r3));
  }
}

std::string compiler() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

void write_manifest(const fs::path& out, const std::string& sub, const RunConfig* cfg, const RunResult& res,
                    double wall) {
  nlohmann::json j;
  j["subcommand"] = sub;
  j["status"] = res.status;
  j["exit_code"] = res.code;
  j["reason"] = res.reason;
  if (cfg) {
    j["config_hash"] = config_hash(*cfg);
    j["seed"] = cfg->seed;
  }
  j["versions"] = {{"chns", CHNS_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                 "." + std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", compiler()}};
  j["wall_time_s"] = wall;
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : res.metrics) m[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(fmt(v));
  j["metrics"] = m;
  std::ofstream os(out / "manifest.json");
  os << j.dump(2) << '\n';
}

}  // namespace

RunResult run_command(const std::string& sub, const RunConfig& cfg, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  Audit audit;
  try {
    fs::create_directories(out);
    if (sub == "simulate")
      run_simulate(cfg, out, false, audit, res);
    else if (sub == "energycheck")
      run_simulate(cfg, out, true, audit, res);
    else if (sub == "gradcheck")
      run_gradcheck(cfg, out, audit, res);
    else if (sub == "optimize")
      run_optimize(cfg, out, audit, res);
    else if (sub == "continue")
      run_continue(cfg, out, audit, res);
    else
      throw ConfigError("unknown subcommand '" + sub + "'");
    if (!audit.failures.empty()) {
      res.code = kExitAudit;
      res.status = "audit_failure";
      res.reason = audit.failures.front();
      if (audit.failures.size() > 1) res.reason += " (+" + std::to_string(audit.failures.size() - 1) + " more)";
    }
  } catch (const ConfigError& e) {
    res.code = kExitConfig;
    res.status = "config_error";
    res.reason = e.what();
  } catch (const SolverError& e) {
    res.code = kExitSolver;
    res.status = "solver_failure";
    res.reason = e.what();
    if (e.step() >= -1) res.reason += " step=" + std::to_string(e.step());
  } catch (const Error& e) {
    res.code = kExitSolver;
    res.status = "solver_failure";
    res.reason = e.what();
  } catch (const fs::filesystem_error& e) {
    res.code = kExitConfig;
    res.status = "config_error";
    res.reason = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::error_code ec;
  if (fs::is_directory(out, ec)) write_manifest(out, sub, &cfg, res, wall);
  return res;
}

RunResult run_command(const std::string& sub, const fs::path& config_path, const fs::path& out) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path.string());
  } catch (const ConfigError& e) {
    RunResult res;
    res.code = kExitConfig;
    res.status = "config_error";
    res.reason = e.what();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!ec) write_manifest(out, sub, nullptr, res, 0.0);
    return res;
  }
  return run_command(sub, cfg, out);
}

}  // namespace chns
