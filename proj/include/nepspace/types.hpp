// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>

namespace nepspace {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using DenseMat = Eigen::MatrixXcd;
using DenseVec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

/// Compressed column storage, complex scalars.
using SparseMat = Eigen::SparseMatrix<Complex>;

/// Induced infinity norm (max absolute row sum).
inline double inf_norm(const DenseMat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const SparseMat& m) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(m.rows());
  for (int j = 0; j < m.outerSize(); ++j)
    for (SparseMat::InnerIterator it(m, j); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  return m.rows() == 0 ? 0.0 : row_sums.maxCoeff();
}

/// Largest absolute entry.
inline double max_abs(const DenseMat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace nepspace
