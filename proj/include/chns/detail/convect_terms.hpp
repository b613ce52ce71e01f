#pragma once

// Stencil of the central-flux convection operator on a MAC grid. Each momentum
// control volume sees four sides; the transport velocity through a side is the
// average of the two nu faces straddling it, the transported value the average
// of the two velocity dofs on either side. Out-of-domain and boundary values
// are dropped (read as zero).

namespace chns {

template <class Visit>
void for_each_convect_term(const GridSpec& g, Visit&& visit) {
  const double cx = 1.0 / (4.0 * g.hx());
  const double cy = 1.0 / (4.0 * g.hy());
  const int nx = g.nx;
  const int ny = g.ny;

  // One control-volume side: flux from nu faces {na, nb}, value from {self, nbr}.
  auto side = [&](int out, double coef, int na, int nb, int nbr) {
    for (int n : {na, nb}) {
      if (n < 0) continue;
      visit(out, n, out, coef);
      if (nbr >= 0) visit(out, n, nbr, coef);
    }
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const int f = g.xface(i, j);
      auto xf = [&](int ii, int jj) { return (ii <= 0 || ii >= nx || jj < 0 || jj >= ny) ? -1 : g.xface(ii, jj); };
      auto yf = [&](int ii, int jj) { return (jj <= 0 || jj >= ny) ? -1 : g.yface(ii, jj); };
      side(f, +cx, xf(i, j), xf(i + 1, j), xf(i + 1, j));
      side(f, -cx, xf(i - 1, j), xf(i, j), xf(i - 1, j));
      side(f, +cy, yf(i - 1, j + 1), yf(i, j + 1), xf(i, j + 1));
      side(f, -cy, yf(i - 1, j), yf(i, j), xf(i, j - 1));
    }
  }
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int f = g.yface(i, j);
      auto yf = [&](int ii, int jj) { return (ii < 0 || ii >= nx || jj <= 0 || jj >= ny) ? -1 : g.yface(ii, jj); };
      auto xf = [&](int ii, int jj) { return (ii <= 0 || ii >= nx) ? -1 : g.xface(ii, jj); };
      side(f, +cy, yf(i, j), yf(i, j + 1), yf(i, j + 1));
      side(f, -cy, yf(i, j - 1), yf(i, j), yf(i, j - 1));
      side(f, +cx, xf(i + 1, j - 1), xf(i + 1, j), yf(i + 1, j));
      side(f, -cx, xf(i, j - 1), xf(i, j), yf(i - 1, j));
    }
  }
}

}  // namespace chns
