// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "nepspace/errors.hpp"
#include "nepspace/types.hpp"

extern "C" {
void zggev_(const char* jobvl, const char* jobvr, const int* n,
            std::complex<double>* a, const int* lda, std::complex<double>* b,
            const int* ldb, std::complex<double>* alpha,
            std::complex<double>* beta, std::complex<double>* vl,
            const int* ldvl, std::complex<double>* vr, const int* ldvr,
            std::complex<double>* work, const int* lwork, double* rwork,
            int* info);
}

namespace nepspace {

/// Finite generalized eigenpairs of a dense pencil (Acal, Bcal).
struct PencilEigs {
  std::vector<Complex> values;  ///< finite eigenvalues only
  DenseMat vectors;             ///< matching right eigenvectors, unit inf-norm
  Index infinite_count = 0;     ///< eigenvalues discarded by the |beta| floor
};

struct EigPair {
  Complex lambda;
  DenseVec v;  // unit inf-norm
};

/// Magnitude floor below which a generalized eigenvalue counts as infinite:
/// |beta| <= 1e3 * eps * ||Bcal||_inf. The linearized pencils have a
/// structurally singular lower block in Bcal, so exact zeros are expected.
inline double infinite_eig_floor(const DenseMat& bcal) {
  return 1e3 * std::numeric_limits<double>::epsilon() * inf_norm(bcal);
}

/// All finite generalized eigenvalues of Acal - s*Bcal with right
/// eigenvectors, via the QZ decomposition.
inline PencilEigs pencil_eigs(const DenseMat& acal, const DenseMat& bcal) {
  if (acal.rows() != acal.cols() || bcal.rows() != bcal.cols() ||
      acal.rows() != bcal.rows())
    throw Error("pencil_eigs: matrices must be square and of equal size");
  const int n = static_cast<int>(acal.rows());
  PencilEigs out;
  if (n == 0) {
    out.vectors.resize(0, 0);
    return out;
  }

  DenseMat a = acal, b = bcal;  // zggev overwrites its inputs
  DenseVec alpha(n), beta(n);
  DenseMat vr(n, n);
  std::vector<double> rwork(8 * n);
  int info = 0;
  int lwork = -1;
  Complex wk_query;
  zggev_("N", "V", &n, a.data(), &n, b.data(), &n, alpha.data(), beta.data(),
         nullptr, &n, vr.data(), &n, &wk_query, &lwork, rwork.data(), &info);
  lwork = static_cast<int>(wk_query.real());
  std::vector<Complex> work(std::max(lwork, 2 * n));
  lwork = static_cast<int>(work.size());
  zggev_("N", "V", &n, a.data(), &n, b.data(), &n, alpha.data(), beta.data(),
         nullptr, &n, vr.data(), &n, work.data(), &lwork, rwork.data(), &info);
  if (info != 0)
    throw DecompositionError("QZ iteration failed to converge", n);

  const double floor = infinite_eig_floor(bcal);
  std::vector<Index> finite;
  for (int i = 0; i < n; ++i) {
    if (std::abs(beta[i]) > floor)
      finite.push_back(i);
    else
      ++out.infinite_count;
  }
  out.values.reserve(finite.size());
  out.vectors.resize(n, static_cast<Index>(finite.size()));
  Index col = 0;
  for (Index i : finite) {
    out.values.push_back(alpha[i] / beta[i]);
    DenseVec v = vr.col(i);
    double scale = v.lpNorm<Eigen::Infinity>();
    if (scale > 0) v /= scale;
    out.vectors.col(col++) = v;
  }
  return out;
}

/// Smallest singular value with its left/right singular vectors.
struct SingularTriple {
  double sigma;
  DenseVec u;
  DenseVec v;
};

inline SingularTriple smallest_singular(const DenseMat& m) {
  if (m.size() == 0) throw Error("smallest_singular: empty matrix");
  Eigen::JacobiSVD<DenseMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw DecompositionError("SVD failed to converge", m.rows());
  Index last = std::min(m.rows(), m.cols()) - 1;
  return {svd.singularValues()(last), svd.matrixU().col(last),
          svd.matrixV().col(last)};
}

inline double smallest_singular_value(const DenseMat& m) {
  if (m.size() == 0) throw Error("smallest_singular: empty matrix");
  Eigen::JacobiSVD<DenseMat> svd(m);
  return svd.singularValues()(std::min(m.rows(), m.cols()) - 1);
}

/// Extends an orthonormal basis with the component of new_cols orthogonal to
/// it. The projection against the basis (and previously accepted columns) is
/// applied twice; columns whose norm shrinks below drop_tol times their
/// original norm are dropped as numerically dependent.
inline DenseMat orthonormal_extend(const DenseMat& basis,
                                   const DenseMat& new_cols,
                                   double drop_tol = 1e-10) {
  if (drop_tol <= 0) throw Error("orthonormal_extend: drop_tol must be > 0");
  const Index rows = basis.size() > 0 ? basis.rows() : new_cols.rows();
  if (new_cols.size() > 0 && new_cols.rows() != rows)
    throw Error("orthonormal_extend: row count mismatch");

  DenseMat q(rows, basis.cols() + new_cols.cols());
  Index r = basis.cols();
  if (r > 0) q.leftCols(r) = basis;

  for (Index j = 0; j < new_cols.cols(); ++j) {
    DenseVec c = new_cols.col(j);
    double pre = c.norm();
    if (!(pre > 0)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (r > 0) c -= q.leftCols(r) * (q.leftCols(r).adjoint() * c);
    }
    double post = c.norm();
    if (post < drop_tol * pre) continue;
    q.col(r++) = c / post;
  }
  return q.leftCols(r);
}

/// Solves M X = RHS (or M^H X = RHS) for square, well-conditioned M.
inline DenseMat dense_solve(const DenseMat& m, const DenseMat& rhs,
                            bool adjoint = false) {
  if (m.rows() != m.cols()) throw Error("dense_solve: matrix must be square");
  if (m.rows() != rhs.rows()) throw Error("dense_solve: shape mismatch");
  Eigen::PartialPivLU<DenseMat> lu(m);
  double rc = lu.rcond();
  if (!(rc > std::numeric_limits<double>::epsilon()))
    throw SingularMatrixError("dense_solve: singular to working precision", rc);
  if (adjoint) return lu.adjoint().solve(rhs);
  return lu.solve(rhs);
}

}  // namespace nepspace
