#include "chns/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chns/errors.hpp"

namespace chns {

namespace {

void require_same(const GridSpec& a, const GridSpec& b, const char* op) {
  if (!(a == b)) throw ConfigError(std::string(op) + ": grid mismatch");
}

void require_shape(const GridSpec& g, Eigen::Index n, Eigen::Index expect, const char* what) {
  if (n != expect)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(expect) + " values on " +
                      std::to_string(g.nx) + "x" + std::to_string(g.ny) + " grid, got " +
                      std::to_string(n));
}

}  // namespace

bool GridSpec::face_on_boundary(int flat) const {
  if (flat < x_faces()) return xface_on_boundary(flat % (nx + 1));
  const int j = (flat - x_faces()) / nx;
  return yface_on_boundary(j);
}

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw ConfigError("grid.nx and grid.ny must be >= 2");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw ConfigError("grid.lx and grid.ly must be positive");
}

CellField::CellField(const GridSpec& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  require_shape(g, values.size(), g.cells(), "CellField");
}

CellField CellField::constant(const GridSpec& g, double c) {
  return CellField(g, Eigen::VectorXd::Constant(g.cells(), c));
}

FaceField::FaceField(const GridSpec& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  require_shape(g, values.size(), g.faces(), "FaceField");
}

void FaceField::clear_boundary() {
  for (int j = 0; j < grid.ny; ++j) {
    x(0, j) = 0.0;
    x(grid.nx, j) = 0.0;
  }
  for (int i = 0; i < grid.nx; ++i) {
    y(i, 0) = 0.0;
    y(i, grid.ny) = 0.0;
  }
}

double FaceField::boundary_max() const {
  double m = 0.0;
  for (int j = 0; j < grid.ny; ++j) m = std::max({m, std::abs(x(0, j)), std::abs(x(grid.nx, j))});
  for (int i = 0; i < grid.nx; ++i) m = std::max({m, std::abs(y(i, 0)), std::abs(y(i, grid.ny))});
  return m;
}

TensorField::TensorField(const GridSpec& g)
    : grid(g),
      xx(Eigen::VectorXd::Zero(g.cells())),
      yy(Eigen::VectorXd::Zero(g.cells())),
      xy(Eigen::VectorXd::Zero(g.nodes())),
      yx(Eigen::VectorXd::Zero(g.nodes())) {}

double inner_cc(const CellField& f, const CellField& g) {
  require_same(f.grid, g.grid, "inner_cc");
  return f.grid.cell_measure() * f.values.dot(g.values);
}

double inner_fc(const FaceField& u, const FaceField& v) {
  require_same(u.grid, v.grid, "inner_fc");
  return u.grid.cell_measure() * u.values.dot(v.values);
}

double inner_tensor(const TensorField& a, const TensorField& b) {
  require_same(a.grid, b.grid, "inner_tensor");
  return a.grid.cell_measure() *
         (a.xx.dot(b.xx) + a.yy.dot(b.yy) + a.xy.dot(b.xy) + a.yx.dot(b.yx));
}

double mean(const CellField& f) { return f.values.mean(); }

double max_abs(const CellField& f) {
  return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
}

FaceField grad_cc(const CellField& f) {
  const GridSpec& g = f.grid;
  require_shape(g, f.values.size(), g.cells(), "grad_cc");
  FaceField out(g);
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) out.x(i, j) = (f(i, j) - f(i - 1, j)) * ihx;
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.y(i, j) = (f(i, j) - f(i, j - 1)) * ihy;
  return out;
}

CellField div_fc(const FaceField& v) {
  const GridSpec& g = v.grid;
  require_shape(g, v.values.size(), g.faces(), "div_fc");
  CellField out(g);
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double e = i + 1 < g.nx ? v.x(i + 1, j) : 0.0;
      const double w = i > 0 ? v.x(i, j) : 0.0;
      const double n = j + 1 < g.ny ? v.y(i, j + 1) : 0.0;
      const double s = j > 0 ? v.y(i, j) : 0.0;
      out(i, j) = (e - w) * ihx + (n - s) * ihy;
    }
  }
  return out;
}

CellField laplace_neumann(const CellField& f) { return div_fc(grad_cc(f)); }

FaceField cell_to_face(const CellField& f) {
  const GridSpec& g = f.grid;
  require_shape(g, f.values.size(), g.cells(), "cell_to_face");
  FaceField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) out.x(i, j) = 0.5 * (f(i, j) + f(i - 1, j));
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.y(i, j) = 0.5 * (f(i, j) + f(i, j - 1));
  return out;
}

CellField face_to_cell(const FaceField& v) {
  const GridSpec& g = v.grid;
  require_shape(g, v.values.size(), g.faces(), "face_to_cell");
  CellField out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      out(i, j) += 0.5 * v.x(i, j);
      out(i - 1, j) += 0.5 * v.x(i, j);
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out(i, j) += 0.5 * v.y(i, j);
      out(i, j - 1) += 0.5 * v.y(i, j);
    }
  }
  return out;
}

CellField kinetic_density(const FaceField& v) {
  FaceField sq(v.grid, v.values.cwiseProduct(v.values));
  CellField out = face_to_cell(sq);
  out.values *= 0.5;
  return out;
}

// Shear components at node (i,j). du/dy uses x-faces (i,j-1), (i,j); at a wall
// the ghost value is the reflection -u, giving a one-sided 2u/h. Nodes on the
// vertical walls see only boundary x-faces, so du/dy vanishes there.
namespace {

template <class F>
void for_each_shear_term(const GridSpec& g, F&& term) {
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      const int n = g.node(i, j);
      if (!g.xface_on_boundary(i)) {
        if (j == 0) {
          term(n, g.xface(i, 0), 2.0 * ihy);
        } else if (j == g.ny) {
          term(n, g.xface(i, g.ny - 1), -2.0 * ihy);
        } else {
          term(n, g.xface(i, j), ihy);
          term(n, g.xface(i, j - 1), -ihy);
        }
      }
      if (!g.yface_on_boundary(j)) {
        if (i == 0) {
          term(n, g.yface(0, j), 2.0 * ihx);
        } else if (i == g.nx) {
          term(n, g.yface(g.nx - 1, j), -2.0 * ihx);
        } else {
          term(n, g.yface(i, j), ihx);
          term(n, g.yface(i - 1, j), -ihx);
        }
      }
    }
  }
}

}  // namespace

TensorField sym_grad(const FaceField& v) {
  const GridSpec& g = v.grid;
  require_shape(g, v.values.size(), g.faces(), "sym_grad");
  TensorField t(g);
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double e = i + 1 < g.nx ? v.x(i + 1, j) : 0.0;
      const double w = i > 0 ? v.x(i, j) : 0.0;
      const double n = j + 1 < g.ny ? v.y(i, j + 1) : 0.0;
      const double s = j > 0 ? v.y(i, j) : 0.0;
      t.xx[g.cell(i, j)] = (e - w) * ihx;
      t.yy[g.cell(i, j)] = (n - s) * ihy;
    }
  }
  for_each_shear_term(g, [&](int node, int face, double c) { t.xy[node] += 0.5 * c * v.values[face]; });
  t.yx = t.xy;
  return t;
}

FaceField sym_grad_adjoint(const TensorField& t) {
  const GridSpec& g = t.grid;
  FaceField out(g);
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double a = t.xx[g.cell(i, j)] * ihx;
      const double b = t.yy[g.cell(i, j)] * ihy;
      if (i + 1 < g.nx) out.x(i + 1, j) += a;
      if (i > 0) out.x(i, j) -= a;
      if (j + 1 < g.ny) out.y(i, j + 1) += b;
      if (j > 0) out.y(i, j) -= b;
    }
  }
  for_each_shear_term(g, [&](int node, int face, double c) {
    out.values[face] += 0.5 * c * (t.xy[node] + t.yx[node]);
  });
  return out;
}

TensorField cell_to_tensor(const CellField& c) {
  const GridSpec& g = c.grid;
  TensorField t(g);
  t.xx = c.values;
  t.yy = c.values;
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      double sum = 0.0;
      int cnt = 0;
      for (int dj = -1; dj <= 0; ++dj) {
        for (int di = -1; di <= 0; ++di) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
          sum += c(ii, jj);
          ++cnt;
        }
      }
      t.xy[g.node(i, j)] = sum / cnt;
    }
  }
  t.yx = t.xy;
  return t;
}

FaceField convect(const FaceField& nu, const FaceField& v) {
  require_same(nu.grid, v.grid, "convect");
  FaceField out(v.grid);
  for_each_convect_term(v.grid, [&](int o, int n, int k, double c) {
    out.values[o] += c * nu.values[n] * v.values[k];
  });
  return out;
}

FaceField convect_skew(const FaceField& nu, const FaceField& v) {
  FaceField out = convect(nu, v);
  const FaceField d = cell_to_face(div_fc(nu));
  out.values -= 0.5 * d.values.cwiseProduct(v.values);
  return out;
}

}  // namespace chns
