/// @file operators.hpp
/// @brief Sparse matrix forms of the grid operators, used for Newton and adjoint assembly.
///
/// Each builder reproduces the field operator of the same name in grid.hpp.
/// Tensor vectors are flattened as [xx (cells), yy (cells), xy (nodes), yx (nodes)].

#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "chns/grid.hpp"

namespace chns {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// faces x cells
SpMat grad_matrix(const GridSpec& g);
/// cells x faces
SpMat div_matrix(const GridSpec& g);
/// faces x cells
SpMat cell_to_face_matrix(const GridSpec& g);
/// cells x faces
SpMat face_to_cell_matrix(const GridSpec& g);
/// tensor x faces
SpMat sym_grad_matrix(const GridSpec& g);
/// tensor x cells, the linear map of cell_to_tensor
SpMat cell_to_tensor_matrix(const GridSpec& g);
/// D(nu), faces x faces
SpMat convect_matrix(const FaceField& nu);
/// K(v) with D(nu) v = K(v) nu, faces x faces
SpMat convect_flux_matrix(const FaceField& v);

int tensor_size(const GridSpec& g);
Eigen::VectorXd flatten(const TensorField& t);
TensorField unflatten(const GridSpec& g, const Eigen::VectorXd& x);

/// 1 on interior faces, 0 on boundary faces.
Eigen::VectorXd interior_face_mask(const GridSpec& g);

SpMat diag(const Eigen::VectorXd& d);

}  // namespace chns
