#include "chns/forward.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "chns/errors.hpp"

namespace chns {

StepInputs step_inputs(int i, const Trajectory& traj, const ControlSeries& u) {
  if (i < -1 || i > traj.M - 2) throw std::out_of_range("step index " + std::to_string(i));
  StepInputs in;
  in.index = i;
  in.phi_cur = traj.phi(i);
  in.v_cur = traj.vel(std::max(i, 0));
  if (i >= 0) {
    in.phi_old = traj.phi(i - 1);
    in.mu_cur = traj.mu(i);
    in.u_next = u.at(i + 1);
  }
  return in;
}

namespace {

void check_initial_data(const CellField& phi_a, const FaceField& v_a, const Model& model) {
  const GridSpec& g = model.grid();
  if (!(phi_a.grid == g) || phi_a.size() != g.cells()) throw ConfigError("phi_a: grid mismatch");
  if (!(v_a.grid == g) || v_a.size() != g.faces()) throw ConfigError("v_a: grid mismatch");
  if (!phi_a.values.allFinite() || !v_a.values.allFinite())
    throw ConfigError("initial data: non-finite values");
  if (std::abs(mean(phi_a)) > 1e-10) throw ConfigError("initial data: phi_a must be mean-free");
  if (v_a.boundary_max() > 0.0) throw ConfigError("initial data: v_a must vanish on the boundary");
  if (max_abs(div_fc(v_a)) > 1e-10) throw ConfigError("initial data: v_a must be divergence-free");
}

Eigen::VectorXd start_from(const StepSystem& sys, const Trajectory& traj, int i) {
  if (i < 0) return sys.pack(traj.phi(-1), CellField(traj.grid), nullptr, nullptr);
  const CellField p = i >= 1 ? traj.pres(i) : CellField(traj.grid);
  return sys.pack(traj.phi(i), traj.mu(i), &traj.vel(i), &p);
}

}  // namespace

StepSolution initial_ch_step(const CellField& phi_a, const FaceField& v_a, const Model& model,
                             const NewtonOptions& opts) {
  check_initial_data(phi_a, v_a, model);
  StepInputs in;
  in.index = -1;
  in.phi_cur = phi_a;
  in.v_cur = v_a;
  StepSystem sys(model, in);
  return newton_solve(sys, sys.pack(phi_a, CellField(model.grid()), nullptr, nullptr), opts);
}

StepSolution step(int i, const Trajectory& traj, const FaceField& u_next, const Model& model,
                  const NewtonOptions& opts) {
  if (i < 0 || i > traj.M - 2) throw std::out_of_range("step index " + std::to_string(i));
  StepInputs in;
  in.index = i;
  in.phi_cur = traj.phi(i);
  in.phi_old = traj.phi(i - 1);
  in.mu_cur = traj.mu(i);
  in.v_cur = traj.vel(i);
  in.u_next = u_next;
  StepSystem sys(model, in);
  return newton_solve(sys, start_from(sys, traj, i), opts);
}

ForwardResult simulate(const ControlSeries& u, const CellField& phi_a, const FaceField& v_a,
                       const Model& model, const NewtonOptions& opts) {
  const int M = model.phys.M;
  const GridSpec& g = model.grid();
  if (u.count() != M - 1) throw ConfigError("simulate: control needs M-1 entries");
  ForwardResult out;
  out.traj = Trajectory(g, M);
  Trajectory& tr = out.traj;
  tr.phi(-1) = phi_a;
  tr.vel(0) = v_a;

  for (int i = -1; i <= M - 2; ++i) {
    StepSolution sol = i < 0 ? initial_ch_step(phi_a, v_a, model, opts)
                             : step(i, tr, u.at(i + 1), model, opts);
    const StepLayout lay{g.cells(), g.faces(), i >= 0};
    tr.phi(i + 1) = CellField(g, sol.x.segment(lay.phi(), lay.C));
    tr.mu(i + 1) = CellField(g, sol.x.segment(lay.mu(), lay.C));
    if (i >= 0) {
      tr.vel(i + 1) = FaceField(g, sol.x.segment(lay.v(), lay.F));
      tr.pres(i + 1) = CellField(g, sol.x.segment(lay.p(), lay.C));
    }
    StepReport rep;
    rep.step = i;
    rep.newton_iters = sol.iters;
    rep.final_residual = sol.residual;
    rep.residual_history = sol.history;
    rep.mass_drift = std::abs(mean(tr.phi(i + 1)) - mean(tr.phi(i)));
    rep.div_inf = i >= 0 ? max_abs(div_fc(tr.vel(i + 1))) : 0.0;
    const auto viol = obstacle_violation(tr.phi(i + 1), model.pot.interval());
    rep.violation_lo = viol.first;
    rep.violation_hi = viol.second;
    if (i >= 0) density(tr.phi(i), model.phys, &rep.density_clamps);
    audit_step(i, tr, u, model, rep);
    out.reports.push_back(std::move(rep));
    out.solves.push_back(std::move(sol));
  }
  return out;
}

double ch_energy(const CellField& phi, const Model& model) {
  const double w = phi.grid.cell_measure();
  const FaceField gp = grad_cc(phi);
  double pot = 0.0;
  for (int c = 0; c < phi.size(); ++c) {
    const double s = phi.values[c];
    pot += model.pot.psi0(s) - 0.5 * model.pot.kappa() * s * s;
  }
  return 0.5 * inner_fc(gp, gp) + w * pot;
}

double energy(const FaceField& v, const CellField& phi, const CellField& phi_prev, const Model& model) {
  const FaceField rho = cell_to_face(density(phi_prev, model.phys));
  const double kin = 0.5 * v.grid.cell_measure() * rho.values.dot(v.values.cwiseProduct(v.values));
  return kin + ch_energy(phi, model);
}

void audit_step(int i, const Trajectory& tr, const ControlSeries& u, const Model& model,
                StepReport& rep) {
  const GridSpec& g = tr.grid;
  const double w = g.cell_measure(), tau = model.phys.tau, kappa = model.pot.kappa();
  const CellField& phi_new = tr.phi(i + 1);
  const CellField& phi_cur = tr.phi(i);
  const CellField& mu_new = tr.mu(i + 1);
  const CellField dphi(g, phi_new.values - phi_cur.values);
  const FaceField gd = grad_cc(dphi);
  const double inc_grad = 0.5 * inner_fc(gd, gd);
  const double inc_kappa = 0.5 * kappa * inner_cc(dphi, dphi);

  const FaceField gmu = grad_cc(mu_new);
  const FaceField mf = cell_to_face(model.phys.mobility.value(phi_cur));
  rep.dissipation_mob = w * mf.values.dot(gmu.values.cwiseProduct(gmu.values));

  if (i < 0) {
    const FaceField& va = tr.vel(0);
    const CellField transport = face_to_cell(FaceField(g, va.values.cwiseProduct(grad_cc(phi_cur).values)));
    rep.energy_before = ch_energy(phi_cur, model);
    rep.energy_after = ch_energy(phi_new, model);
    rep.dissipation_visc = 0.0;
    rep.increment_terms = inc_grad + inc_kappa;
    rep.control_work = -tau * inner_cc(transport, mu_new);
  } else {
    const FaceField& v_new = tr.vel(i + 1);
    const FaceField& v_cur = tr.vel(i);
    const FaceField rho_old = cell_to_face(density(tr.phi(i - 1), model.phys));
    const Eigen::VectorXd dv = v_new.values - v_cur.values;
    const double inc_v = 0.5 * w * rho_old.values.dot(dv.cwiseProduct(dv));
    const TensorField eps = sym_grad(v_new);
    const TensorField eta = cell_to_tensor(model.phys.viscosity.value(phi_cur));
    rep.dissipation_visc =
        2.0 * w * (eta.xx.dot(eps.xx.cwiseProduct(eps.xx)) + eta.yy.dot(eps.yy.cwiseProduct(eps.yy)) +
                   eta.xy.dot(eps.xy.cwiseProduct(eps.xy)) + eta.yx.dot(eps.yx.cwiseProduct(eps.yx)));
    rep.energy_before = energy(v_cur, phi_cur, tr.phi(i - 1), model);
    rep.energy_after = energy(v_new, phi_new, phi_cur, model);
    rep.increment_terms = inc_v + inc_grad + inc_kappa;
    rep.control_work = tau * inner_fc(u.at(i + 1), v_new);
  }
  rep.energy_slack = rep.energy_before + rep.control_work -
                     (rep.energy_after + rep.increment_terms + tau * rep.dissipation_visc +
                      tau * rep.dissipation_mob);
}

std::vector<double> energy_audit(const Trajectory& traj, const ControlSeries& u, const Model& model) {
  std::vector<double> out;
  for (int i = -1; i <= traj.M - 2; ++i) {
    StepReport rep;
    audit_step(i, traj, u, model, rep);
    out.push_back(rep.energy_slack);
  }
  return out;
}

CellField initial_spinodal(const GridSpec& g, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  CellField f(g);
  for (int c = 0; c < f.size(); ++c) f.values[c] = amplitude * dist(rng);
  f.values.array() -= f.values.mean();
  return f;
}

CellField initial_stripes(const GridSpec& g, double width, double amplitude) {
  CellField f(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = (i + 0.5) * g.hx() / g.lx;
      // phase 2 on (1/4, 3/4) of the width, phase 1 elsewhere
      const double d = std::min(x - 0.25, 0.75 - x) * g.lx;
      f(i, j) = std::tanh(d / width);
    }
  }
  f.values.array() -= f.values.mean();
  f.values *= amplitude;
  return f;
}

FaceField stream_field(const GridSpec& g, double amplitude) {
  const double pi = std::numbers::pi;
  auto s = [&](int i, int j) {
    const double x = i * g.hx(), y = j * g.hy();
    const double a = std::sin(pi * x / g.lx), b = std::sin(pi * y / g.ly);
    return a * a * b * b;
  };
  FaceField v(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) v.x(i, j) = amplitude * (s(i, j + 1) - s(i, j)) / g.hy();
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) v.y(i, j) = -amplitude * (s(i + 1, j) - s(i, j)) / g.hx();
  return v;
}

}  // namespace chns
