// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "nepspace/dense.hpp"
#include "nepspace/errors.hpp"
#include "nepspace/rng.hpp"
#include "nepspace/threads.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

/// The rank test of the contour solver could not separate signal from noise;
/// the caller should retry with more probe columns (or a different region).
class ContourRankError : public Error {
public:
  explicit ContourRankError(const std::string& what) : Error(what) {}
};

/// Circle used by the contour-integral eigensolver.
struct Contour {
  Complex center;
  double radius = 1.0;
  int nodes = 64;       // trapezoid points, even, >= 16
  int probe_cols = 6;   // >= expected eigenvalue count + 2
};

/// Eigenvalues of the matrix polynomial P(s) = sum_j s^j P_j via the first
/// companion linearization, solved as a dense pencil. Eigenvectors are read
/// off the last block row of the pencil eigenvectors. Results are sorted by
/// distance to tau; `want <= 0` returns all finite eigenvalues.
inline std::vector<EigPair> companion_eigs(const std::vector<DenseMat>& coeffs,
                                           Complex tau, int want = 0) {
  if (coeffs.size() < 2)
    throw Error("companion_eigs: polynomial degree must be >= 1");
  const Index n = coeffs.front().rows();
  const Index d = static_cast<Index>(coeffs.size()) - 1;
  for (const auto& c : coeffs)
    if (c.rows() != n || c.cols() != n)
      throw Error("companion_eigs: coefficient size mismatch");
  if (max_abs(coeffs.back()) == 0.0)
    throw Error("companion_eigs: leading coefficient is the zero matrix");

  // (lambda * diag(P_d, I, ..) - [[-P_{d-1} .. -P_0], [I 0 ..]]) z = 0
  // with z = [lambda^{d-1} v; ...; v].
  DenseMat a = DenseMat::Zero(n * d, n * d);
  DenseMat b = DenseMat::Zero(n * d, n * d);
  for (Index j = 0; j < d; ++j)
    a.block(0, j * n, n, n) = -coeffs[d - 1 - j];
  for (Index j = 0; j + 1 < d; ++j)
    a.block((j + 1) * n, j * n, n, n) = DenseMat::Identity(n, n);
  b.topLeftCorner(n, n) = coeffs[d];
  for (Index j = 1; j < d; ++j)
    b.block(j * n, j * n, n, n) = DenseMat::Identity(n, n);

  PencilEigs pe = pencil_eigs(a, b);
  std::vector<EigPair> out;
  out.reserve(pe.values.size());
  for (std::size_t i = 0; i < pe.values.size(); ++i) {
    DenseVec v = pe.vectors.col(static_cast<Index>(i)).tail(n);
    double scale = v.lpNorm<Eigen::Infinity>();
    if (!(scale > 0)) continue;  // degenerate pencil vector
    out.push_back({pe.values[i], v / scale});
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](const EigPair& x, const EigPair& y) {
                     return std::abs(x.lambda - tau) < std::abs(y.lambda - tau);
                   });
  if (want > 0 && static_cast<int>(out.size()) > want) out.resize(want);
  return out;
}

/// Beyn-style contour-integral eigensolver over a circle. Trapezoid
/// quadrature of the probe moments, rank-revealing SVD, then a small
/// eigendecomposition. Starts from two moments and falls back to four when
/// the rank test saturates; a saturated four-moment test raises
/// ContourRankError. Candidates outside the disk or failing the residual
/// gate ||T(lambda) v|| <= 1e-8 ||T(lambda)|| ||v|| are discarded.
inline std::vector<EigPair> contour_eigs(
    const std::function<DenseMat(Complex)>& eval_t, const Contour& c, int want,
    Complex tau, Rng& rng) {
  if (c.nodes < 16 || c.nodes % 2 != 0)
    throw Error("contour_eigs: node count must be even and >= 16");
  if (!(c.radius > 0)) throw Error("contour_eigs: radius must be positive");
  const int nnodes = c.nodes;

  const DenseMat t_probe = eval_t(c.center);
  const Index n = t_probe.rows();
  const Index ncols = std::max<Index>(1, std::min<Index>(c.probe_cols, n));
  DenseMat probe = rng.complex_normal_matrix(n, ncols);

  // Per-node resolvent applications, filled in parallel and reduced in a
  // fixed order afterwards so results do not depend on the thread count.
  std::vector<DenseMat> node_solutions(nnodes);
  std::vector<Complex> node_points(nnodes), node_weights(nnodes);
  for (int j = 0; j < nnodes; ++j) {
    double theta = 2.0 * std::numbers::pi * j / nnodes;
    Complex w = std::polar(1.0, theta);
    node_points[j] = c.center + c.radius * w;
    node_weights[j] = w;
  }
  std::vector<std::exception_ptr> node_errors(nnodes);
  std::vector<double> node_norms(nnodes, 0.0);
  parallel_for(nnodes, [&](long j) {
    try {
      DenseMat tj = eval_t(node_points[j]);
      node_norms[j] = inf_norm(tj);
      Eigen::PartialPivLU<DenseMat> lu(tj);
      node_solutions[j] = lu.solve(probe);
    } catch (...) {
      node_errors[j] = std::current_exception();
    }
  });
  for (const auto& err : node_errors)
    if (err) std::rethrow_exception(err);
  const double contour_scale =
      *std::max_element(node_norms.begin(), node_norms.end());

  const double sv_noise = 1e-11;
  for (int half_moments = 1; half_moments <= 2; ++half_moments) {
    const int nmoments = 2 * half_moments;
    // Scaled moments in the unit-disk variable w = (s - center)/radius.
    std::vector<DenseMat> moment(nmoments, DenseMat::Zero(n, ncols));
    for (int j = 0; j < nnodes; ++j) {
      Complex wp = node_weights[j];
      for (int p = 0; p < nmoments; ++p) {
        moment[p] += wp * node_solutions[j];
        wp *= node_weights[j];
      }
    }
    for (int p = 0; p < nmoments; ++p) moment[p] *= c.radius / nnodes;

    const int kblk = half_moments;
    DenseMat h0(kblk * n, kblk * ncols), h1(kblk * n, kblk * ncols);
    for (int bi = 0; bi < kblk; ++bi)
      for (int bj = 0; bj < kblk; ++bj) {
        h0.block(bi * n, bj * ncols, n, ncols) = moment[bi + bj];
        h1.block(bi * n, bj * ncols, n, ncols) = moment[bi + bj + 1];
      }

    Eigen::JacobiSVD<DenseMat> svd(h0,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv_noise * (sv.size() > 0 ? sv(0) : 0.0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    if (rank == 0) return {};

    if (rank == sv.size()) {
      // No detectable gap: the moment space is full. Add moments first,
      // then report that more probe columns are needed.
      if (half_moments == 1) continue;
      throw ContourRankError(
          "contour_eigs: rank test saturated; increase probes");
    }

    DenseMat u0 = svd.matrixU().leftCols(rank);
    DenseMat w0 = svd.matrixV().leftCols(rank);
    DenseVec inv_sv = sv.head(rank).cwiseInverse();
    DenseMat small = u0.adjoint() * h1 * w0 * inv_sv.asDiagonal();

    Eigen::ComplexEigenSolver<DenseMat> eig(small);
    if (eig.info() != Eigen::Success)
      throw DecompositionError("contour_eigs: eigensolver failed", rank);

    std::vector<EigPair> out;
    for (Index i = 0; i < rank; ++i) {
      Complex mu = eig.eigenvalues()(i);
      if (std::abs(mu) > 1.0) continue;  // outside the disk
      Complex lambda = c.center + c.radius * mu;
      DenseVec v = u0.topRows(n) * eig.eigenvectors().col(i);
      double scale = v.lpNorm<Eigen::Infinity>();
      if (!(scale > 0)) continue;
      v /= scale;
      DenseMat tl = eval_t(lambda);
      // ||T(lambda)||_inf itself collapses to sigma_min for 1x1 blocks, so
      // the gate also admits the problem scale seen along the contour.
      double resid = (tl * v).lpNorm<Eigen::Infinity>();
      if (resid > 1e-8 * std::max(inf_norm(tl), contour_scale)) continue;
      out.push_back({lambda, std::move(v)});
    }
    std::stable_sort(out.begin(), out.end(),
                     [&](const EigPair& x, const EigPair& y) {
                       return std::abs(x.lambda - tau) <
                              std::abs(y.lambda - tau);
                     });
    if (want > 0 && static_cast<int>(out.size()) > want) out.resize(want);
    return out;
  }
  return {};  // unreachable
}

}  // namespace nepspace
