#include "chns/control.hpp"

#include <cmath>
#include <limits>

#include "chns/log.hpp"

namespace chns {

ControlBox ControlBox::uniform(const GridSpec& g, double lo, double hi) {
  ControlBox b{Eigen::VectorXd::Constant(g.faces(), lo), Eigen::VectorXd::Constant(g.faces(), hi)};
  for (int f = 0; f < g.faces(); ++f)
    if (g.face_on_boundary(f)) b.lower[f] = b.upper[f] = 0.0;
  return b;
}

bool ControlBox::bounded() const { return lower.allFinite() && upper.allFinite(); }

void ControlBox::validate() const {
  if (lower.size() != upper.size()) throw ConfigError("objective: box bounds have different sizes");
  for (Eigen::Index k = 0; k < lower.size(); ++k)
    if (lower[k] > upper[k]) throw ConfigError("objective.box: lower bound exceeds upper bound");
}

void ControlParams::validate() const {
  box.validate();
  if (!(xi >= 0.0)) throw ConfigError("objective.xi must be >= 0");
  if (!(xi > 0.0) && !box.bounded())
    throw ConfigError("objective: need xi > 0 or a bounded control box");
  if (std::abs(mean(phi_d)) > 1e-10) throw ConfigError("objective: phi_d must be mean-free");
}

double objective(const Trajectory& traj, const ControlSeries& u, const ControlParams& cp) {
  const CellField d(traj.grid, traj.phi(traj.M - 1).values - cp.phi_d.values);
  return 0.5 * inner_cc(d, d) + 0.5 * cp.xi * inner(u, u);
}

ObjectiveGradient objective_state_gradient(const Trajectory& traj, const ControlParams& cp) {
  ObjectiveGradient g;
  g.dphi.emplace(traj.M - 1, CellField(traj.grid, traj.phi(traj.M - 1).values - cp.phi_d.values));
  return g;
}

ControlSeries project_Uad(const ControlSeries& u, const ControlParams& cp) {
  ControlSeries out = u;
  for (auto& f : out.u) f.values = f.values.cwiseMax(cp.box.lower).cwiseMin(cp.box.upper);
  return out;
}

double stationarity(const ControlSeries& u, const ControlSeries& g, const ControlParams& cp) {
  ControlSeries step = u;
  for (int k = 1; k <= u.count(); ++k) step.at(k).values -= g.at(k).values;
  const ControlSeries p = project_Uad(step, cp);
  ControlSeries d = u;
  for (int k = 1; k <= u.count(); ++k) d.at(k).values -= p.at(k).values;
  return std::sqrt(inner(d, d));
}

Evaluation evaluate(const ControlSeries& u, const Scenario& sc, const ControlParams& cp,
                    bool with_gradient) {
  Evaluation e;
  e.u = u;
  e.fwd = simulate(u, sc.phi_a, sc.v_a, sc.model, sc.newton);
  e.J = objective(e.fwd.traj, u, cp);
  if (with_gradient) {
    e.adj = adjoint_sweep(e.fwd.traj, u, objective_state_gradient(e.fwd.traj, cp), sc.model, &e.fwd);
    e.grad = reduced_gradient(u, e.adj, cp.xi);
  }
  return e;
}

namespace {

ControlSeries axpy_project(const ControlSeries& u, double s, const ControlSeries& g,
                           const ControlParams& cp) {
  ControlSeries t = u;
  for (int k = 1; k <= u.count(); ++k) t.at(k).values -= s * g.at(k).values;
  return project_Uad(t, cp);
}

double inner_diff(const ControlSeries& g, const ControlSeries& a, const ControlSeries& b) {
  double s = 0.0;
  for (int k = 1; k <= a.count(); ++k)
    s += g.grid.cell_measure() * g.at(k).values.dot(a.at(k).values - b.at(k).values);
  return s;
}

}  // namespace

OptimizeResult optimize(const ControlSeries& u0, const Scenario& sc, const ControlParams& cp,
                        const OptimizeOptions& opts) {
  cp.validate();
  OptimizeResult res;
  OptimizeReport& rep = res.report;
  Evaluation cur = evaluate(project_Uad(u0, cp), sc, cp);
  double stat = stationarity(cur.u, cur.grad, cp);
  rep.objective.push_back(cur.J);
  rep.stationarity.push_back(stat);
  rep.step_length.push_back(0.0);
  rep.backtracks.push_back(0);

  double s = opts.initial_step;
  while (true) {
    if (stat <= opts.tol_stat) {
      rep.converged = true;
      rep.stop_reason = "stationary";
      break;
    }
    if (rep.iterations >= opts.max_iters) {
      rep.stop_reason = "iteration cap";
      break;
    }
    int bt = 0;
    Evaluation trial;
    for (;; ++bt) {
      if (bt > opts.max_backtracks) {
        rep.stop_reason = "line search failed";
        throw OptimizerStagnation("optimize: Armijo backtracking failed at iteration " +
                                      std::to_string(rep.iterations) + ", stationarity " +
                                      std::to_string(stat),
                                  rep);
      }
      ControlSeries ut = axpy_project(cur.u, s, cur.grad, cp);
      trial = evaluate(ut, sc, cp, false);
      const double decrease = inner_diff(cur.grad, trial.u, cur.u);
      if (trial.J <= cur.J + opts.armijo_c * decrease) break;
      s *= opts.backtrack;
    }
    trial.adj = adjoint_sweep(trial.fwd.traj, trial.u, objective_state_gradient(trial.fwd.traj, cp),
                              sc.model, &trial.fwd);
    trial.grad = reduced_gradient(trial.u, trial.adj, cp.xi);

    // Barzilai-Borwein (long) step for the next iteration
    double next = opts.initial_step;
    if (opts.bb_step) {
      double ss = 0.0, sy = 0.0;
      const double w = cur.u.grid.cell_measure();
      for (int k = 1; k <= cur.u.count(); ++k) {
        const Eigen::VectorXd ds = trial.u.at(k).values - cur.u.at(k).values;
        const Eigen::VectorXd dg = trial.grad.at(k).values - cur.grad.at(k).values;
        ss += w * ds.squaredNorm();
        sy += w * ds.dot(dg);
      }
      if (sy > 0.0 && ss > 0.0) next = ss / sy;
    }
    rep.iterations += 1;
    rep.step_length.push_back(s);
    rep.backtracks.push_back(bt);
    cur = std::move(trial);
    stat = stationarity(cur.u, cur.grad, cp);
    rep.objective.push_back(cur.J);
    rep.stationarity.push_back(stat);
    log_debug("optimize it=" + std::to_string(rep.iterations) + " J=" + std::to_string(cur.J) +
              " stat=" + std::to_string(stat) + " bt=" + std::to_string(bt));
    s = next;
  }
  res.best = std::move(cur);
  return res;
}

}  // namespace chns
