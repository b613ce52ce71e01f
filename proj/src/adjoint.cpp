#include "chns/adjoint.hpp"

#include <string>

#include "chns/errors.hpp"

namespace chns {

CellField AdjointTrajectory::p(int i) const {
  if (i < -1) throw std::out_of_range("adjoint p index " + std::to_string(i));
  return i >= M - 1 ? CellField(grid) : p_[i + 1];
}

CellField AdjointTrajectory::r(int i) const {
  if (i < -1) throw std::out_of_range("adjoint r index " + std::to_string(i));
  return i >= M - 1 ? CellField(grid) : r_[i + 1];
}

FaceField AdjointTrajectory::q(int i) const {
  if (i < -1) throw std::out_of_range("adjoint q index " + std::to_string(i));
  return (i < 0 || i >= M - 1) ? FaceField(grid) : q_[i];
}

CellField AdjointTrajectory::pressure(int i) const {
  if (i < -1) throw std::out_of_range("adjoint pressure index " + std::to_string(i));
  return (i < 0 || i >= M - 1) ? CellField(grid) : pres_[i];
}

namespace {

Eigen::VectorXd solve_transposed(const SpMat& J, const Eigen::VectorXd& rhs, int step,
                                 const StepSolution* reuse) {
  if (reuse && reuse->lu) {
    Eigen::VectorXd y = reuse->lu->transpose().solve(rhs);
    if (reuse->lu->info() == Eigen::Success && y.allFinite()) return y;
  }
  Eigen::SparseLU<SpMat> lu;
  SpMat Jt = J.transpose();
  lu.compute(Jt);
  if (lu.info() != Eigen::Success)
    throw LinearAlgebraError("adjoint: transpose factorization failed: " + lu.lastErrorMessage(), 0.0,
                             step);
  Eigen::VectorXd y = lu.solve(rhs);
  if (!y.allFinite()) throw LinearAlgebraError("adjoint: non-finite solution", 0.0, step);
  return y;
}

}  // namespace

AdjointTrajectory adjoint_sweep(const Trajectory& traj, const ControlSeries& u,
                                const ObjectiveGradient& obj, const Model& model,
                                const ForwardResult* fwd) {
  const GridSpec& g = traj.grid;
  const int M = traj.M, C = g.cells(), F = g.faces();
  const double w = g.cell_measure();
  const int nsteps = M;  // k = -1 .. M-2

  std::vector<StepLayout> lay(nsteps);
  std::vector<Eigen::VectorXd> rhs(nsteps);
  for (int k = -1; k <= M - 2; ++k) {
    lay[k + 1] = StepLayout{C, F, k >= 0};
    rhs[k + 1] = Eigen::VectorXd::Zero(lay[k + 1].size());
    auto it = obj.dphi.find(k + 1);
    if (it != obj.dphi.end()) rhs[k + 1].segment(0, C) += w * it->second.values;
    auto im = obj.dmu.find(k + 1);
    if (im != obj.dmu.end()) rhs[k + 1].segment(C, C) += w * im->second.values;
    auto iv = obj.dv.find(k + 1);
    if (iv != obj.dv.end() && k >= 0) rhs[k + 1].segment(lay[k + 1].v(), F) += w * iv->second.values;
  }

  AdjointTrajectory adj;
  adj.grid = g;
  adj.M = M;
  adj.y.assign(nsteps, Eigen::VectorXd());
  adj.p_.assign(nsteps, CellField(g));
  adj.r_.assign(nsteps, CellField(g));
  adj.q_.assign(M - 1, FaceField(g));
  adj.pres_.assign(M - 1, CellField(g));

  for (int k = M - 2; k >= -1; --k) {
    const StepSystem sys(model, step_inputs(k, traj, u));
    const StepLayout& L = lay[k + 1];
    const FaceField* vnew = k >= 0 ? &traj.vel(k + 1) : nullptr;
    const CellField pnew = k >= 0 ? traj.pres(k + 1) : CellField(g);
    const Eigen::VectorXd x = sys.pack(traj.phi(k + 1), traj.mu(k + 1), vnew, &pnew);
    const StepSolution* reuse = fwd && static_cast<int>(fwd->solves.size()) == nsteps ? &fwd->solves[k + 1] : nullptr;
    const SpMat J = reuse ? SpMat() : sys.jacobian(x);
    const Eigen::VectorXd y = solve_transposed(reuse ? reuse->jacobian : J, -rhs[k + 1], k, reuse);
    adj.y[k + 1] = y;
    adj.p_[k + 1] = CellField(g, y.segment(L.phi(), C));
    adj.r_[k + 1] = CellField(g, y.segment(L.mu(), C));
    if (k >= 0) {
      adj.q_[k] = FaceField(g, y.segment(L.v(), F));
      adj.pres_[k] = CellField(g, y.segment(L.p(), C));

      const StepCoupling cp = sys.coupling(x);
      Eigen::VectorXd& prev = rhs[k];  // unknowns of step k-1 contain phi_k, mu_k, v_k
      prev.segment(0, C) += cp.d_phi_cur.transpose() * y;
      prev.segment(C, C) += cp.d_mu_cur.transpose() * y;
      if (k >= 1) {
        prev.segment(lay[k].v(), F) += cp.d_v_cur.transpose() * y;
        rhs[k - 1].segment(0, C) += cp.d_phi_old.transpose() * y;  // phi_{k-1}
      }
    }
  }
  return adj;
}

ControlSeries reduced_gradient(const ControlSeries& u, const AdjointTrajectory& adj, double xi) {
  const Eigen::VectorXd chi = interior_face_mask(u.grid);
  ControlSeries g(u.grid, u.count() + 1);
  for (int k = 1; k <= u.count(); ++k)
    g.at(k).values = chi.cwiseProduct(xi * u.at(k).values - adj.q(k - 1).values);
  return g;
}

std::vector<MultiplierField> multiplier_fields(const Trajectory& traj, const AdjointTrajectory& adj,
                                               const YosidaPotential& pot) {
  std::vector<MultiplierField> out;
  for (int i = 0; i <= traj.M - 1; ++i) {
    MultiplierField m;
    m.a = pot.gamma(traj.phi(i));
    m.lambda = pot.gamma_d1(traj.phi(i));
    m.lambda.values = m.lambda.values.cwiseProduct(adj.r(i - 1).values);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace chns
