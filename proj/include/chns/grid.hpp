/// @file grid.hpp
/// @brief Uniform 2D MAC grid, staggered fields and the discrete operator calculus.
///
/// Layout (nx x ny cells on [0,lx] x [0,ly]):
///   - cell (i,j)      at ((i+1/2)hx, (j+1/2)hy), flat index j*nx + i
///   - x-face (i,j)    at (i hx, (j+1/2)hy), i = 0..nx, flat index j*(nx+1) + i
///   - y-face (i,j)    at ((i+1/2)hx, j hy), j = 0..ny, flat index X + j*nx + i
///     where X = (nx+1)*ny is the number of x-faces
///   - node (i,j)      at (i hx, j hy), flat index j*(nx+1) + i
///
/// Faces on the domain boundary (i = 0, nx for x-faces; j = 0, ny for y-faces)
/// are read as zero by every operator. This encodes the homogeneous Neumann
/// closure for cell gradients and the no-slip closure for velocities.
///
/// All discrete inner products weight every entry by the cell measure hx*hy,
/// so the adjoint of every operator below is its plain transpose.

#pragma once

#include <Eigen/Core>

namespace chns {

struct GridSpec {
  int nx = 16;
  int ny = 16;
  double lx = 1.0;
  double ly = 1.0;

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double cell_measure() const { return hx() * hy(); }

  int cells() const { return nx * ny; }
  int x_faces() const { return (nx + 1) * ny; }
  int y_faces() const { return nx * (ny + 1); }
  int faces() const { return x_faces() + y_faces(); }
  int nodes() const { return (nx + 1) * (ny + 1); }

  int cell(int i, int j) const { return j * nx + i; }
  int xface(int i, int j) const { return j * (nx + 1) + i; }
  int yface(int i, int j) const { return x_faces() + j * nx + i; }
  int node(int i, int j) const { return j * (nx + 1) + i; }

  bool xface_on_boundary(int i) const { return i == 0 || i == nx; }
  bool yface_on_boundary(int j) const { return j == 0 || j == ny; }
  /// True for flat face indices that lie on the domain boundary.
  bool face_on_boundary(int flat) const;

  /// Throws ConfigError unless nx, ny >= 2 and lx, ly > 0.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Scalar field at cell centers (phi, mu, pressure, adjoint p and r).
struct CellField {
  GridSpec grid;
  Eigen::VectorXd values;

  CellField() = default;
  explicit CellField(const GridSpec& g) : grid(g), values(Eigen::VectorXd::Zero(g.cells())) {}
  CellField(const GridSpec& g, Eigen::VectorXd v);

  static CellField constant(const GridSpec& g, double c);

  double& operator()(int i, int j) { return values[grid.cell(i, j)]; }
  double operator()(int i, int j) const { return values[grid.cell(i, j)]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// Normal velocity components on faces: x-faces first, then y-faces.
struct FaceField {
  GridSpec grid;
  Eigen::VectorXd values;

  FaceField() = default;
  explicit FaceField(const GridSpec& g) : grid(g), values(Eigen::VectorXd::Zero(g.faces())) {}
  FaceField(const GridSpec& g, Eigen::VectorXd v);

  double& x(int i, int j) { return values[grid.xface(i, j)]; }
  double x(int i, int j) const { return values[grid.xface(i, j)]; }
  double& y(int i, int j) { return values[grid.yface(i, j)]; }
  double y(int i, int j) const { return values[grid.yface(i, j)]; }
  int size() const { return static_cast<int>(values.size()); }

  /// Sets every boundary face to zero.
  void clear_boundary();
  /// Largest magnitude over boundary faces.
  double boundary_max() const;
};

/// Symmetric-gradient components: xx, yy at cell centers; xy, yx at nodes.
struct TensorField {
  GridSpec grid;
  Eigen::VectorXd xx, yy, xy, yx;

  TensorField() = default;
  explicit TensorField(const GridSpec& g);
};

// Pairings ------------------------------------------------------------------

double inner_cc(const CellField& f, const CellField& g);
double inner_fc(const FaceField& u, const FaceField& v);
double inner_tensor(const TensorField& a, const TensorField& b);
double mean(const CellField& f);
double max_abs(const CellField& f);

// Operators ----------------------------------------------------------------

/// Two-point difference on interior faces, zero on boundary faces.
FaceField grad_cc(const CellField& f);
/// Flux divergence; boundary face values are ignored. Equals -grad_cc^T.
CellField div_fc(const FaceField& g);
/// 5-point Neumann Laplacian, div_fc(grad_cc(f)).
CellField laplace_neumann(const CellField& f);
/// Arithmetic average onto interior faces; boundary faces 0.
FaceField cell_to_face(const CellField& f);
/// Transpose of cell_to_face: each interior face hands half its value to both neighbours.
CellField face_to_cell(const FaceField& g);
/// Cell density |v|^2/2 that pairs with cell_to_face: face_to_cell(v*v)/2.
CellField kinetic_density(const FaceField& v);

/// epsilon(v) = (grad v + grad v^T)/2 with reflected ghosts at no-slip walls.
TensorField sym_grad(const FaceField& v);
/// Transpose of sym_grad.
FaceField sym_grad_adjoint(const TensorField& t);
/// Cell coefficient placed at tensor locations: identity at cells, average of
/// the adjacent cells at nodes.
TensorField cell_to_tensor(const CellField& c);

/// Convection D(nu) v of the momentum flux div(v (x) nu), central averaging.
/// D(nu) = S(nu) + diag(cell_to_face(div_fc nu))/2 with S(nu) skew-symmetric.
FaceField convect(const FaceField& nu, const FaceField& v);
/// The skew-symmetric part S(nu) v.
FaceField convect_skew(const FaceField& nu, const FaceField& v);

/// Visits every bilinear term  out[o] += coef * nu[n] * v[k]  of convect().
/// Shared by the field version and the sparse assembly.
template <class Visit>
void for_each_convect_term(const GridSpec& g, Visit&& visit);

}  // namespace chns

#include "chns/detail/convect_terms.hpp"
