#include "chns/step_system.hpp"

#include <cmath>
#include <string>

#include "chns/errors.hpp"

namespace chns {

namespace {

void add_block(Triplets& t, const SpMat& b, int r0, int c0, double scale = 1.0) {
  for (int k = 0; k < b.outerSize(); ++k)
    for (SpMat::InnerIterator it(b, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

void add_ones_col(Triplets& t, int r0, int n, int col, double v) {
  for (int k = 0; k < n; ++k) t.emplace_back(r0 + k, col, v);
}

void add_ones_row(Triplets& t, int row, int c0, int n, double v) {
  for (int k = 0; k < n; ++k) t.emplace_back(row, c0 + k, v);
}

SpMat build(int rows, int cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SpMat embed_rows(const SpMat& b, int r0, int n) {
  Triplets t;
  add_block(t, b, r0, 0);
  return build(n, static_cast<int>(b.cols()), t);
}

}  // namespace

StepSystem::StepSystem(const Model& model, StepInputs in) : model_(model), in_(std::move(in)) {
  const GridSpec& g = model_.grid();
  lay_.C = g.cells();
  lay_.F = g.faces();
  lay_.coupled = in_.index >= 0;
  w_ = g.cell_measure();
  if (in_.phi_cur.size() != lay_.C || !(in_.phi_cur.grid == g))
    throw ConfigError("step inputs: phi_cur does not match the grid");
  if (in_.v_cur.size() != lay_.F) throw ConfigError("step inputs: v_cur does not match the grid");

  const PhysConfig& ph = model_.phys;
  mf_ = cell_to_face(ph.mobility.value(in_.phi_cur));
  gphi_ = grad_cc(in_.phi_cur);
  nu_ = FaceField(g);
  if (lay_.coupled) {
    if (in_.phi_old.size() != lay_.C || in_.mu_cur.size() != lay_.C || in_.u_next.size() != lay_.F)
      throw ConfigError("step inputs: coupled step needs phi_old, mu_cur and u_next");
    rhof_cur_ = cell_to_face(density(in_.phi_cur, ph));
    rhof_old_ = cell_to_face(density(in_.phi_old, ph));
    const FaceField mf_old = cell_to_face(ph.mobility.value(in_.phi_old));
    const FaceField gmu = grad_cc(in_.mu_cur);
    nu_.values = rhof_old_.values.cwiseProduct(in_.v_cur.values) -
                 ph.beta() * mf_old.values.cwiseProduct(gmu.values);
    eta_t_ = flatten(cell_to_tensor(ph.viscosity.value(in_.phi_cur)));
  }
  assemble_linear();
}

void StepSystem::assemble_linear() {
  const GridSpec& g = model_.grid();
  const int C = lay_.C, F = lay_.F, n = lay_.size();
  const double w = w_, tau = model_.phys.tau;
  const SpMat G = grad_matrix(g);
  const SpMat Dv = div_matrix(g);
  const SpMat lap = Dv * G;
  Triplets t;

  // (a)
  add_block(t, diag(Eigen::VectorXd::Constant(C, 1.0 / tau)), 0, lay_.phi(), w);
  add_block(t, SpMat(Dv * diag(mf_.values) * G), 0, lay_.mu(), -w);
  // (b), (b')
  add_block(t, lap, C, lay_.phi(), -w);
  add_block(t, diag(Eigen::VectorXd::Ones(C)), C, lay_.mu(), -w);
  add_ones_col(t, C, C, lay_.c(), -w);
  add_ones_row(t, 2 * C, lay_.mu(), C, w);

  b_ = Eigen::VectorXd::Zero(n);
  b_.segment(C, C) = w * model_.pot.kappa() * in_.phi_cur.values;

  if (!lay_.coupled) {
    const CellField transport = face_to_cell(FaceField(g, in_.v_cur.values.cwiseProduct(gphi_.values)));
    b_.segment(0, C) = w * (in_.phi_cur.values / tau - transport.values);
    A_ = build(n, n, t);
    return;
  }

  const SpMat Icf = cell_to_face_matrix(g);
  const SpMat Ifc = face_to_cell_matrix(g);
  const SpMat E = sym_grad_matrix(g);
  const Eigen::VectorXd chi = interior_face_mask(g);
  const int r_v = lay_.v(), r_d = lay_.p(), r_dd = lay_.lam();

  // (a) transport by the new velocity
  add_block(t, SpMat(Ifc * diag(gphi_.values)), 0, lay_.v(), w);
  // (c)
  SpMat mom = diag(rhof_cur_.values / tau) + convect_matrix(nu_) +
              SpMat(E.transpose() * diag(2.0 * eta_t_) * E) + diag(Eigen::VectorXd::Ones(F) - chi);
  add_block(t, mom, r_v, lay_.v(), w);
  add_block(t, G, r_v, lay_.p(), w);
  add_block(t, SpMat(diag(gphi_.values) * Icf), r_v, lay_.mu(), -w);
  // (d), (d')
  add_block(t, Dv, r_d, lay_.v(), w);
  add_ones_col(t, r_d, C, lay_.lam(), w);
  add_ones_row(t, r_dd, lay_.p(), C, w);

  A_ = build(n, n, t);
  b_.segment(0, C) = w * in_.phi_cur.values / tau;
  b_.segment(r_v, F) =
      w * chi.cwiseProduct(rhof_old_.values.cwiseProduct(in_.v_cur.values) / tau + in_.u_next.values);
}

Eigen::VectorXd StepSystem::residual(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r = A_ * x - b_;
  const int C = lay_.C;
  for (int k = 0; k < C; ++k) r[C + k] += w_ * model_.pot.gamma(x[k]);
  return r;
}

double StepSystem::residual_norm(const Eigen::VectorXd& x) const {
  return residual(x).cwiseAbs().maxCoeff() / w_;
}

SpMat StepSystem::jacobian(const Eigen::VectorXd& x) const {
  const int C = lay_.C;
  Triplets t;
  t.reserve(C);
  for (int k = 0; k < C; ++k) t.emplace_back(C + k, k, w_ * model_.pot.gamma_d1(x[k]));
  SpMat j = A_ + build(lay_.size(), lay_.size(), t);
  j.makeCompressed();
  return j;
}

Eigen::VectorXd StepSystem::apply_jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const {
  const GridSpec& g = model_.grid();
  const int C = lay_.C, F = lay_.F;
  const double w = w_, tau = model_.phys.tau;
  const CellField dphi(g, dx.segment(lay_.phi(), C));
  const CellField dmu(g, dx.segment(lay_.mu(), C));
  const double dc = dx[lay_.c()];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(lay_.size());

  CellField a = div_fc(FaceField(g, mf_.values.cwiseProduct(grad_cc(dmu).values)));
  out.segment(0, C) = w * (dphi.values / tau - a.values);

  const CellField lap = laplace_neumann(dphi);
  for (int k = 0; k < C; ++k)
    out[C + k] = w * (-lap.values[k] + model_.pot.gamma_d1(x[k]) * dphi.values[k] - dmu.values[k] - dc);
  out[2 * C] = w * dmu.values.sum();
  if (!lay_.coupled) return out;

  const FaceField dv(g, dx.segment(lay_.v(), F));
  const CellField dp(g, dx.segment(lay_.p(), C));
  const double dlam = dx[lay_.lam()];

  out.segment(0, C) += w * face_to_cell(FaceField(g, dv.values.cwiseProduct(gphi_.values))).values;

  TensorField eps = sym_grad(dv);
  const TensorField eta = unflatten(g, 2.0 * eta_t_);
  eps.xx = eps.xx.cwiseProduct(eta.xx);
  eps.yy = eps.yy.cwiseProduct(eta.yy);
  eps.xy = eps.xy.cwiseProduct(eta.xy);
  eps.yx = eps.yx.cwiseProduct(eta.yx);
  FaceField mom = sym_grad_adjoint(eps);
  mom.values += rhof_cur_.values.cwiseProduct(dv.values) / tau + convect(nu_, dv).values +
                grad_cc(dp).values - cell_to_face(dmu).values.cwiseProduct(gphi_.values);
  for (int f = 0; f < F; ++f)
    if (g.face_on_boundary(f)) mom.values[f] += dv.values[f];
  out.segment(lay_.v(), F) = w * mom.values;

  out.segment(lay_.p(), C) = w * (div_fc(dv).values.array() + dlam).matrix();
  out[lay_.lam()] = w * dp.values.sum();
  return out;
}

StepCoupling StepSystem::coupling(const Eigen::VectorXd& x) const {
  if (!lay_.coupled) throw Error("coupling: the initial step has no variable predecessors");
  const GridSpec& g = model_.grid();
  const PhysConfig& ph = model_.phys;
  const int C = lay_.C, F = lay_.F, n = lay_.size();
  const double w = w_, tau = ph.tau, beta = ph.beta();
  const SpMat G = grad_matrix(g);
  const SpMat Dv = div_matrix(g);
  const SpMat Icf = cell_to_face_matrix(g);
  const SpMat Ifc = face_to_cell_matrix(g);
  const SpMat E = sym_grad_matrix(g);
  const SpMat T = cell_to_tensor_matrix(g);

  const FaceField v_new = vel(x);
  const CellField mu_new = mu(x);
  const FaceField gmu_new = grad_cc(mu_new);
  const SpMat K = convect_flux_matrix(v_new);

  StepCoupling out;
  {
    Triplets t;
    add_block(t, diag(Eigen::VectorXd::Constant(C, -1.0 / tau)), 0, 0, w);
    add_block(t, SpMat(Ifc * diag(v_new.values) * G), 0, 0, w);
    add_block(t, SpMat(Dv * diag(gmu_new.values) * Icf * diag(ph.mobility.d1(in_.phi_cur).values)),
              0, 0, -w);
    add_block(t, diag(Eigen::VectorXd::Constant(C, 1.0)), C, 0, -w * model_.pot.kappa());
    const Eigen::VectorXd ev = sym_grad_matrix(g) * v_new.values;
    SpMat vrows = diag(v_new.values / tau) * Icf * diag(density_d1(in_.phi_cur, ph).values) +
                  SpMat(E.transpose() * diag(2.0 * ev) * T * diag(ph.viscosity.d1(in_.phi_cur).values)) -
                  diag(cell_to_face(mu_new).values) * G;
    add_block(t, vrows, lay_.v(), 0, w);
    out.d_phi_cur = build(n, C, t);
  }
  const FaceField mf_old = cell_to_face(ph.mobility.value(in_.phi_old));
  out.d_mu_cur = embed_rows(SpMat(K * diag(mf_old.values) * G), lay_.v(), n) * (-beta * w);
  out.d_v_cur = embed_rows(SpMat(diag(-rhof_old_.values / tau) + K * diag(rhof_old_.values)), lay_.v(), n) * w;
  {
    const SpMat rho_d = Icf * diag(density_d1(in_.phi_old, ph).values);
    const SpMat dnu = diag(in_.v_cur.values) * rho_d -
                      beta * diag(grad_cc(in_.mu_cur).values) * Icf *
                          diag(ph.mobility.d1(in_.phi_old).values);
    SpMat vrows = -diag(in_.v_cur.values / tau) * rho_d + K * dnu;
    out.d_phi_old = embed_rows(vrows, lay_.v(), n) * w;
  }
  out.d_u_next = embed_rows(diag(-interior_face_mask(g)), lay_.v(), n) * w;
  (void)F;
  return out;
}

Eigen::VectorXd StepSystem::pack(const CellField& phi, const CellField& mu, const FaceField* v,
                                 const CellField* p) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay_.size());
  x.segment(lay_.phi(), lay_.C) = phi.values;
  x.segment(lay_.mu(), lay_.C) = mu.values;
  if (lay_.coupled) {
    if (v) x.segment(lay_.v(), lay_.F) = v->values;
    if (p) x.segment(lay_.p(), lay_.C) = p->values;
  }
  return x;
}

CellField StepSystem::phi(const Eigen::VectorXd& x) const {
  return CellField(model_.grid(), x.segment(lay_.phi(), lay_.C));
}
CellField StepSystem::mu(const Eigen::VectorXd& x) const {
  return CellField(model_.grid(), x.segment(lay_.mu(), lay_.C));
}
FaceField StepSystem::vel(const Eigen::VectorXd& x) const {
  if (!lay_.coupled) return FaceField(model_.grid());
  return FaceField(model_.grid(), x.segment(lay_.v(), lay_.F));
}
CellField StepSystem::pres(const Eigen::VectorXd& x) const {
  if (!lay_.coupled) return CellField(model_.grid());
  return CellField(model_.grid(), x.segment(lay_.p(), lay_.C));
}

StepSolution newton_solve(const StepSystem& sys, Eigen::VectorXd x, const NewtonOptions& opts) {
  StepSolution sol;
  auto lu = std::make_shared<Eigen::SparseLU<SpMat>>();
  bool analyzed = false;
  bool polished = false;
  const double w = sys.model().grid().cell_measure();
  Eigen::VectorXd F = sys.residual(x);
  double r = F.cwiseAbs().maxCoeff() / w;
  for (int k = 0;; ++k) {
    if (!std::isfinite(r))
      throw SolverError("newton: non-finite residual", r, sys.inputs().index);
    sol.history.push_back(r);
    if (r <= opts.tol) {
      if (!opts.polish || polished) break;
      polished = true;
    }
    if (k >= opts.max_iters) {
      if (r <= opts.tol) break;
      throw SolverError("newton: no convergence in " + std::to_string(opts.max_iters) +
                            " iterations, residual " + std::to_string(r),
                        r, sys.inputs().index);
    }
    SpMat J = sys.jacobian(x);
    if (!analyzed) {
      lu->analyzePattern(J);
      analyzed = true;
    }
    lu->factorize(J);
    if (lu->info() != Eigen::Success)
      throw LinearAlgebraError("newton: factorization failed: " + lu->lastErrorMessage(), r,
                               sys.inputs().index);
    Eigen::VectorXd dx = lu->solve(-F);
    if (lu->info() != Eigen::Success || !dx.allFinite())
      throw LinearAlgebraError("newton: linear solve failed", r, sys.inputs().index);
    sol.jacobian = std::move(J);
    ++sol.iters;

    double step = 1.0;
    Eigen::VectorXd xn = x + dx;
    Eigen::VectorXd Fn = sys.residual(xn);
    double rn = Fn.cwiseAbs().maxCoeff() / w;
    if (opts.line_search) {
      for (int h = 0; h < opts.max_halvings && !(rn < r) && r > opts.tol; ++h) {
        step *= 0.5;
        xn = x + step * dx;
        Fn = sys.residual(xn);
        rn = Fn.cwiseAbs().maxCoeff() / w;
      }
    }
    x = std::move(xn);
    F = std::move(Fn);
    r = rn;
  }
  sol.x = std::move(x);
  sol.residual = r;
  sol.lu = std::move(lu);
  return sol;
}

}  // namespace chns
