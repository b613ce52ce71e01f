// Independent reference implementations for the test suite.
//
// Dense operator matrices are built from ghost-padded stencils, written from
// the continuous definitions rather than from the library code. The whole
// time-discrete system is assembled as one nonlinear map of all unknowns,
// differentiated by complex step, and solved by dense Newton.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "chns/forward.hpp"
#include "chns/potential.hpp"

namespace oracle {

using cd = std::complex<double>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using Mat = Eigen::MatrixXd;

inline double re(double x) { return x; }
inline double re(const cd& x) { return x.real(); }

/// Sum in long double; the SBP tests compare quantities near roundoff.
inline long double dot_ld(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  long double s = 0.0L;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += static_cast<long double>(a[k]) * b[k];
  return s;
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = d(rng);
  return v;
}

/// Dense operators on a grid, indexed like the library (cells, x-faces then y-faces, nodes).
struct Ops {
  chns::GridSpec g;
  int C, F, N;
  double hx, hy, w;
  Mat G, Div, Icf, Ifc, E, Tc;  // E: tensor x faces, Tc: tensor x cells

  explicit Ops(const chns::GridSpec& grid) : g(grid) {
    C = g.nx * g.ny;
    F = (g.nx + 1) * g.ny + g.nx * (g.ny + 1);
    N = (g.nx + 1) * (g.ny + 1);
    hx = g.lx / g.nx;
    hy = g.ly / g.ny;
    w = hx * hy;
    G = Mat::Zero(F, C);
    Div = Mat::Zero(C, F);
    Icf = Mat::Zero(F, C);
    Ifc = Mat::Zero(C, F);
    E = Mat::Zero(2 * C + 2 * N, F);
    Tc = Mat::Zero(2 * C + 2 * N, C);

    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        if (i == 0 || i == g.nx) continue;
        const int f = xf(i, j);
        G(f, cell(i, j)) += 1.0 / hx;
        G(f, cell(i - 1, j)) -= 1.0 / hx;
        Icf(f, cell(i, j)) = Icf(f, cell(i - 1, j)) = 0.5;
      }
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (j == 0 || j == g.ny) continue;
        const int f = yf(i, j);
        G(f, cell(i, j)) += 1.0 / hy;
        G(f, cell(i, j - 1)) -= 1.0 / hy;
        Icf(f, cell(i, j)) = Icf(f, cell(i, j - 1)) = 0.5;
      }
    // Flux divergence with zero wall flux.
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const int c = cell(i, j);
        if (i + 1 < g.nx) Div(c, xf(i + 1, j)) += 1.0 / hx;
        if (i > 0) Div(c, xf(i, j)) -= 1.0 / hx;
        if (j + 1 < g.ny) Div(c, yf(i, j + 1)) += 1.0 / hy;
        if (j > 0) Div(c, yf(i, j)) -= 1.0 / hy;
      }
    // Face-to-cell: half of each interior face to both neighbours.
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) Ifc(cell(i, j), xf(i, j)) = Ifc(cell(i - 1, j), xf(i, j)) = 0.5;
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) Ifc(cell(i, j), yf(i, j)) = Ifc(cell(i, j - 1), yf(i, j)) = 0.5;

    // Symmetric gradient. Velocity read through ghosts: u_x at x-face (i, j)
    // for j outside [0, ny) reflects to -u_x(i, mirror j); wall faces are 0.
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        add_ux(E, cell(i, j), i + 1, j, 1.0 / hx);
        add_ux(E, cell(i, j), i, j, -1.0 / hx);
        add_uy(E, C + cell(i, j), i, j + 1, 1.0 / hy);
        add_uy(E, C + cell(i, j), i, j, -1.0 / hy);
      }
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        const int n = node(i, j);
        for (int row : {2 * C + n, 2 * C + N + n}) {
          add_ux(E, row, i, j, 0.5 / hy);
          add_ux(E, row, i, j - 1, -0.5 / hy);
          add_uy(E, row, i, j, 0.5 / hx);
          add_uy(E, row, i - 1, j, -0.5 / hx);
        }
      }
    for (int c = 0; c < C; ++c) Tc(c, c) = Tc(C + c, c) = 1.0;
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        std::vector<int> adj;
        for (int jj : {j - 1, j})
          for (int ii : {i - 1, i})
            if (ii >= 0 && jj >= 0 && ii < g.nx && jj < g.ny) adj.push_back(cell(ii, jj));
        for (int c : adj) Tc(2 * C + node(i, j), c) = Tc(2 * C + N + node(i, j), c) = 1.0 / adj.size();
      }
  }

  int cell(int i, int j) const { return j * g.nx + i; }
  int xf(int i, int j) const { return j * (g.nx + 1) + i; }
  int yf(int i, int j) const { return (g.nx + 1) * g.ny + j * g.nx + i; }
  int node(int i, int j) const { return j * (g.nx + 1) + i; }
  bool interior(int f) const {
    const int X = (g.nx + 1) * g.ny;
    if (f < X) {
      const int i = f % (g.nx + 1);
      return i != 0 && i != g.nx;
    }
    const int j = (f - X) / g.nx;
    return j != 0 && j != g.ny;
  }

  // u_x at (i, j) with reflection across the horizontal walls.
  void add_ux(Mat& m, int row, int i, int j, double c) const {
    if (i <= 0 || i >= g.nx) return;
    if (j < 0) m(row, xf(i, -j - 1)) -= c;
    else if (j >= g.ny) m(row, xf(i, 2 * g.ny - 1 - j)) -= c;
    else m(row, xf(i, j)) += c;
  }
  void add_uy(Mat& m, int row, int i, int j, double c) const {
    if (j <= 0 || j >= g.ny) return;
    if (i < 0) m(row, yf(-i - 1, j)) -= c;
    else if (i >= g.nx) m(row, yf(2 * g.nx - 1 - i, j)) -= c;
    else m(row, yf(i, j)) += c;
  }

  /// Momentum convection div(v (x) nu) in flux form on padded arrays.
  template <class T>
  Vec<T> convect(const Vec<T>& nu, const Vec<T>& v) const {
    auto X = [&](const Vec<T>& a, int i, int j) -> T {
      return (i <= 0 || i >= g.nx || j < 0 || j >= g.ny) ? T(0.0) : a[xf(i, j)];
    };
    auto Y = [&](const Vec<T>& a, int i, int j) -> T {
      return (i < 0 || i >= g.nx || j <= 0 || j >= g.ny) ? T(0.0) : a[yf(i, j)];
    };
    Vec<T> out = Vec<T>::Zero(F);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) {
        const T fe = 0.5 * (X(nu, i, j) + X(nu, i + 1, j)) * 0.5 * (X(v, i, j) + X(v, i + 1, j));
        const T fw = 0.5 * (X(nu, i - 1, j) + X(nu, i, j)) * 0.5 * (X(v, i - 1, j) + X(v, i, j));
        const T fn = 0.5 * (Y(nu, i - 1, j + 1) + Y(nu, i, j + 1)) * 0.5 * (X(v, i, j) + X(v, i, j + 1));
        const T fs = 0.5 * (Y(nu, i - 1, j) + Y(nu, i, j)) * 0.5 * (X(v, i, j - 1) + X(v, i, j));
        out[xf(i, j)] = (fe - fw) / hx + (fn - fs) / hy;
      }
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const T fn = 0.5 * (Y(nu, i, j) + Y(nu, i, j + 1)) * 0.5 * (Y(v, i, j) + Y(v, i, j + 1));
        const T fs = 0.5 * (Y(nu, i, j - 1) + Y(nu, i, j)) * 0.5 * (Y(v, i, j - 1) + Y(v, i, j));
        const T fe = 0.5 * (X(nu, i + 1, j - 1) + X(nu, i + 1, j)) * 0.5 * (Y(v, i, j) + Y(v, i + 1, j));
        const T fw = 0.5 * (X(nu, i, j - 1) + X(nu, i, j)) * 0.5 * (Y(v, i - 1, j) + Y(v, i, j));
        out[yf(i, j)] = (fn - fs) / hy + (fe - fw) / hx;
      }
    return out;
  }
};

template <class T>
Vec<T> mul(const Mat& m, const Vec<T>& x) {
  return m.cast<T>() * x;
}

template <class T>
T coeff(const chns::Coefficient& c, const T& s) {
  return c.c0 + c.c1 * std::tanh(s);
}

template <class T>
T rho(const T& phi, const chns::PhysConfig& p) {
  const T r = 0.5 * (p.rho1 + p.rho2) + p.beta() * (phi + p.mean_shift);
  return re(r) > 0.0 ? r : T(0.0);
}

/// Layout of the stacked unknowns: [x_{-1}; x_0; ...; x_{M-2}].
struct SpaceTime {
  const chns::Model& model;
  Ops ops;
  int M;
  chns::CellField phi_a;
  chns::FaceField v_a;

  SpaceTime(const chns::Model& m, const chns::CellField& pa, const chns::FaceField& va)
      : model(m), ops(m.grid()), M(m.phys.M), phi_a(pa), v_a(va) {}

  int init_size() const { return 2 * ops.C + 1; }
  int step_size() const { return 3 * ops.C + ops.F + 2; }
  int size() const { return init_size() + (M - 1) * step_size(); }
  int offset(int k) const { return k < 0 ? 0 : init_size() + k * step_size(); }

  /// Residual of all steps for unknowns X and controls U (U stacks u_1 .. u_{M-1}).
  template <class T>
  Vec<T> residual(const Vec<T>& X, const Vec<T>& U) const {
    const int C = ops.C, F = ops.F;
    const chns::PhysConfig& p = model.phys;
    const chns::YosidaPotential& pot = model.pot;
    const double tau = p.tau, kappa = pot.kappa();
    Vec<T> R(size());

    auto mob_face = [&](const Vec<T>& phi) {
      Vec<T> m(C);
      for (int c = 0; c < C; ++c) m[c] = coeff(p.mobility, phi[c]);
      return mul(ops.Icf, m);
    };
    auto rho_face = [&](const Vec<T>& phi) {
      Vec<T> r(C);
      for (int c = 0; c < C; ++c) r[c] = rho(phi[c], p);
      return mul(ops.Icf, r);
    };
    auto ch_rows = [&](const Vec<T>& phi, const Vec<T>& mu, const T& cc, const Vec<T>& phi_i,
                       const Vec<T>& transport, Vec<T>& out) {
      const Vec<T> flux = mob_face(phi_i).cwiseProduct(mul(ops.G, mu));
      out.segment(0, C) = (phi - phi_i) / tau + transport - mul(ops.Div, flux);
      const Vec<T> lap = mul(ops.Div, mul(ops.G, phi));
      for (int c = 0; c < C; ++c) out[C + c] = -lap[c] + pot.gamma(phi[c]) - mu[c] - kappa * phi_i[c] - cc;
      out[2 * C] = mu.sum();
    };

    const Vec<T> pa = phi_a.values.cast<T>();
    const Vec<T> va = v_a.values.cast<T>();
    {
      Vec<T> out(init_size());
      const Vec<T> tr = mul(ops.Ifc, Vec<T>(va.cwiseProduct(mul(ops.G, pa))));
      ch_rows(X.segment(0, C), X.segment(C, C), X[2 * C], pa, tr, out);
      R.segment(0, init_size()) = out;
    }
    for (int k = 0; k <= M - 2; ++k) {
      const int o = offset(k), op = offset(k - 1);
      const Vec<T> phi_i = X.segment(op, C);
      const Vec<T> mu_i = X.segment(op + C, C);
      const Vec<T> phi_o = k == 0 ? pa : Vec<T>(X.segment(offset(k - 2), C));
      const Vec<T> v_i = k == 0 ? va : Vec<T>(X.segment(op + 2 * C + 1, F));
      const Vec<T> phi = X.segment(o, C), mu = X.segment(o + C, C);
      const T cc = X[o + 2 * C];
      const Vec<T> v = X.segment(o + 2 * C + 1, F);
      const Vec<T> pr = X.segment(o + 2 * C + 1 + F, C);
      const T lam = X[o + 3 * C + 1 + F];
      const Vec<T> u = U.segment(k * F, F);

      const Vec<T> gphi = mul(ops.G, phi_i);
      Vec<T> out(step_size());
      ch_rows(phi, mu, cc, phi_i, mul(ops.Ifc, Vec<T>(v.cwiseProduct(gphi))), out);

      const Vec<T> rho_old = rho_face(phi_o);
      const Vec<T> nu = rho_old.cwiseProduct(v_i) - p.beta() * mob_face(phi_o).cwiseProduct(mul(ops.G, mu_i));
      Vec<T> eta(C);
      for (int c = 0; c < C; ++c) eta[c] = coeff(p.viscosity, phi_i[c]);
      const Vec<T> eta_t = mul(ops.Tc, eta);
      const Vec<T> visc = mul(Mat(ops.E.transpose()), Vec<T>(2.0 * eta_t.cwiseProduct(mul(ops.E, v))));
      Vec<T> mom = rho_face(phi_i).cwiseProduct(v) / tau - rho_old.cwiseProduct(v_i) / tau + ops.convect(nu, v) +
                   visc + mul(ops.G, pr) - mul(ops.Icf, mu).cwiseProduct(gphi) - u;
      for (int f = 0; f < F; ++f)
        if (!ops.interior(f)) mom[f] = v[f];
      out.segment(2 * C + 1, F) = mom;
      out.segment(2 * C + 1 + F, C) = mul(ops.Div, v) + Vec<T>::Constant(C, lam);
      out[3 * C + 1 + F] = pr.sum();
      R.segment(o, step_size()) = out;
    }
    return R;
  }

  /// Complex-step Jacobian of the residual w.r.t. X (wrt_u = false) or U.
  Mat jacobian(const Eigen::VectorXd& X, const Eigen::VectorXd& U, bool wrt_u = false) const {
    const double h = 1e-30;
    const int n = wrt_u ? static_cast<int>(U.size()) : static_cast<int>(X.size());
    Mat J(size(), n);
    Vec<cd> Xc = X.cast<cd>(), Uc = U.cast<cd>();
    for (int m = 0; m < n; ++m) {
      Vec<cd>& target = wrt_u ? Uc : Xc;
      target[m] += cd(0.0, h);
      J.col(m) = residual(Xc, Uc).imag() / h;
      target[m] -= cd(0.0, h);
    }
    return J;
  }

  /// Dense Newton on the whole time horizon from X0.
  Eigen::VectorXd solve(Eigen::VectorXd X, const Eigen::VectorXd& U, double tol = 1e-13, int max_iter = 40) const {
    for (int it = 0; it < max_iter; ++it) {
      const Eigen::VectorXd R = residual<double>(X, U);
      if (R.cwiseAbs().maxCoeff() < tol) return X;
      X -= jacobian(X, U).partialPivLu().solve(R);
    }
    if (residual<double>(X, U).cwiseAbs().maxCoeff() >= tol) throw std::runtime_error("oracle Newton failed");
    return X;
  }

  /// Stacks a library trajectory into the oracle layout.
  Eigen::VectorXd stack(const chns::ForwardResult& f) const {
    Eigen::VectorXd X(size());
    for (int k = -1; k <= M - 2; ++k) {
      const Eigen::VectorXd& x = f.solves[k + 1].x;
      X.segment(offset(k), x.size()) = x;
    }
    return X;
  }

  /// Reduced gradient (Euclidean, w.r.t. the stacked U) of
  /// 1/2 w |phi_{M-1} - phi_d|^2 + xi/2 w |U|^2 via a dense transposed solve.
  Eigen::VectorXd gradient(const Eigen::VectorXd& X, const Eigen::VectorXd& U, const Eigen::VectorXd& phi_d,
                           double xi) const {
    Eigen::VectorXd dJdX = Eigen::VectorXd::Zero(size());
    dJdX.segment(offset(M - 2), ops.C) = ops.w * (X.segment(offset(M - 2), ops.C) - phi_d);
    const Mat JX = jacobian(X, U);
    const Mat JU = jacobian(X, U, true);
    const Eigen::VectorXd Y = JX.transpose().partialPivLu().solve(dJdX);
    return xi * ops.w * U - JU.transpose() * Y;
  }
};

}  // namespace oracle
