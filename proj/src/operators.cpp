#include "chns/operators.hpp"

#include <algorithm>

namespace chns {

namespace {

SpMat from_triplets(int rows, int cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

int tensor_size(const GridSpec& g) { return 2 * g.cells() + 2 * g.nodes(); }

Eigen::VectorXd flatten(const TensorField& t) {
  Eigen::VectorXd x(tensor_size(t.grid));
  x << t.xx, t.yy, t.xy, t.yx;
  return x;
}

TensorField unflatten(const GridSpec& g, const Eigen::VectorXd& x) {
  TensorField t(g);
  const int c = g.cells(), n = g.nodes();
  t.xx = x.segment(0, c);
  t.yy = x.segment(c, c);
  t.xy = x.segment(2 * c, n);
  t.yx = x.segment(2 * c + n, n);
  return t;
}

Eigen::VectorXd interior_face_mask(const GridSpec& g) {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(g.faces());
  for (int f = 0; f < g.faces(); ++f)
    if (g.face_on_boundary(f)) m[f] = 0.0;
  return m;
}

SpMat diag(const Eigen::VectorXd& d) {
  Triplets t;
  t.reserve(d.size());
  for (Eigen::Index k = 0; k < d.size(); ++k)
    if (d[k] != 0.0) t.emplace_back(k, k, d[k]);
  return from_triplets(d.size(), d.size(), t);
}

SpMat grad_matrix(const GridSpec& g) {
  Triplets t;
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      t.emplace_back(g.xface(i, j), g.cell(i, j), ihx);
      t.emplace_back(g.xface(i, j), g.cell(i - 1, j), -ihx);
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      t.emplace_back(g.yface(i, j), g.cell(i, j), ihy);
      t.emplace_back(g.yface(i, j), g.cell(i, j - 1), -ihy);
    }
  }
  return from_triplets(g.faces(), g.cells(), t);
}

SpMat div_matrix(const GridSpec& g) {
  Triplets t;
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.cell(i, j);
      if (i + 1 < g.nx) t.emplace_back(c, g.xface(i + 1, j), ihx);
      if (i > 0) t.emplace_back(c, g.xface(i, j), -ihx);
      if (j + 1 < g.ny) t.emplace_back(c, g.yface(i, j + 1), ihy);
      if (j > 0) t.emplace_back(c, g.yface(i, j), -ihy);
    }
  }
  return from_triplets(g.cells(), g.faces(), t);
}

SpMat cell_to_face_matrix(const GridSpec& g) {
  Triplets t;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      t.emplace_back(g.xface(i, j), g.cell(i, j), 0.5);
      t.emplace_back(g.xface(i, j), g.cell(i - 1, j), 0.5);
    }
  }
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      t.emplace_back(g.yface(i, j), g.cell(i, j), 0.5);
      t.emplace_back(g.yface(i, j), g.cell(i, j - 1), 0.5);
    }
  }
  return from_triplets(g.faces(), g.cells(), t);
}

SpMat face_to_cell_matrix(const GridSpec& g) {
  return SpMat(cell_to_face_matrix(g).transpose());
}

SpMat sym_grad_matrix(const GridSpec& g) {
  Triplets t;
  const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
  const int c0 = 0, c1 = g.cells(), n0 = 2 * g.cells(), n1 = 2 * g.cells() + g.nodes();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.cell(i, j);
      if (i + 1 < g.nx) t.emplace_back(c0 + c, g.xface(i + 1, j), ihx);
      if (i > 0) t.emplace_back(c0 + c, g.xface(i, j), -ihx);
      if (j + 1 < g.ny) t.emplace_back(c1 + c, g.yface(i, j + 1), ihy);
      if (j > 0) t.emplace_back(c1 + c, g.yface(i, j), -ihy);
    }
  }
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      const int n = g.node(i, j);
      auto add = [&](int face, double c) {
        t.emplace_back(n0 + n, face, 0.5 * c);
        t.emplace_back(n1 + n, face, 0.5 * c);
      };
      if (i > 0 && i < g.nx) {
        if (j == 0) add(g.xface(i, 0), 2.0 * ihy);
        else if (j == g.ny) add(g.xface(i, g.ny - 1), -2.0 * ihy);
        else {
          add(g.xface(i, j), ihy);
          add(g.xface(i, j - 1), -ihy);
        }
      }
      if (j > 0 && j < g.ny) {
        if (i == 0) add(g.yface(0, j), 2.0 * ihx);
        else if (i == g.nx) add(g.yface(g.nx - 1, j), -2.0 * ihx);
        else {
          add(g.yface(i, j), ihx);
          add(g.yface(i - 1, j), -ihx);
        }
      }
    }
  }
  return from_triplets(tensor_size(g), g.faces(), t);
}

SpMat cell_to_tensor_matrix(const GridSpec& g) {
  Triplets t;
  const int c1 = g.cells(), n0 = 2 * g.cells(), n1 = 2 * g.cells() + g.nodes();
  for (int c = 0; c < g.cells(); ++c) {
    t.emplace_back(c, c, 1.0);
    t.emplace_back(c1 + c, c, 1.0);
  }
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      const int ilo = std::max(i - 1, 0), ihi = std::min(i, g.nx - 1);
      const int jlo = std::max(j - 1, 0), jhi = std::min(j, g.ny - 1);
      const double w = 1.0 / ((ihi - ilo + 1) * (jhi - jlo + 1));
      for (int jj = jlo; jj <= jhi; ++jj) {
        for (int ii = ilo; ii <= ihi; ++ii) {
          t.emplace_back(n0 + g.node(i, j), g.cell(ii, jj), w);
          t.emplace_back(n1 + g.node(i, j), g.cell(ii, jj), w);
        }
      }
    }
  }
  return from_triplets(tensor_size(g), g.cells(), t);
}

SpMat convect_matrix(const FaceField& nu) {
  const GridSpec& g = nu.grid;
  Triplets t;
  for_each_convect_term(g, [&](int o, int n, int k, double c) {
    t.emplace_back(o, k, c * nu.values[n]);
  });
  return from_triplets(g.faces(), g.faces(), t);
}

SpMat convect_flux_matrix(const FaceField& v) {
  const GridSpec& g = v.grid;
  Triplets t;
  for_each_convect_term(g, [&](int o, int n, int k, double c) {
    t.emplace_back(o, n, c * v.values[k]);
  });
  return from_triplets(g.faces(), g.faces(), t);
}

}  // namespace chns
