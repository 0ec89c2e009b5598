// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "nepspace/dense.hpp"
#include "nepspace/errors.hpp"
#include "nepspace/sparse.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

/// Rational eigenproblem in transfer-function form
///   R(s) = P(s) + C (s I - A)^{-1} B,
/// with a large sparse middle factor A (k x k) and thin B (k x n), C (n x k).
/// P holds the polynomial coefficients P_0 .. P_d; empty P means a proper
/// problem. Immutable after construction.
class StateSpaceRep {
public:
  StateSpaceRep(std::vector<DenseMat> poly, SparseMat a, DenseMat b, DenseMat c)
      : poly_(std::move(poly)), a_(std::move(a)), b_(std::move(b)),
        c_(std::move(c)) {
    if (a_.rows() != a_.cols()) throw Error("StateSpaceRep: A must be square");
    if (a_.rows() < 1) throw Error("StateSpaceRep: state dimension must be >= 1");
    if (b_.rows() != a_.rows() || c_.cols() != a_.rows() ||
        b_.cols() != c_.rows())
      throw Error("StateSpaceRep: inconsistent dimensions");
    for (const auto& p : poly_)
      if (p.rows() != io_dim() || p.cols() != io_dim())
        throw Error("StateSpaceRep: polynomial coefficient size mismatch");
    a_.makeCompressed();
    combined_norm_ = compute_combined_norm();
  }

  Index state_dim() const { return a_.rows(); }   // k
  Index io_dim() const { return b_.cols(); }      // n
  /// Degree used by the linearization; a constant or absent P is treated as
  /// degree 1 with P_1 = 0.
  Index lin_degree() const {
    return std::max<Index>(1, static_cast<Index>(poly_.size()) - 1);
  }

  const std::vector<DenseMat>& poly() const { return poly_; }
  const SparseMat& a() const { return a_; }
  const DenseMat& b() const { return b_; }
  const DenseMat& c() const { return c_; }

  /// ||[[A, B], [C, 0]]||_inf, the scale in the termination formula. Computed
  /// once from the blocks without forming the concatenation.
  double combined_inf_norm() const { return combined_norm_; }

  /// d^j/ds^j P(s) by Horner on the coefficient matrices.
  DenseMat poly_eval(Complex s, Index deriv_order = 0) const {
    const Index n = io_dim();
    DenseMat acc = DenseMat::Zero(n, n);
    const Index d = static_cast<Index>(poly_.size()) - 1;
    for (Index p = d; p >= static_cast<Index>(deriv_order); --p) {
      double fall = 1.0;
      for (Index t = 0; t < deriv_order; ++t) fall *= double(p - t);
      acc = acc * s + fall * poly_[p];
    }
    return acc;
  }

private:
  double compute_combined_norm() const {
    Eigen::VectorXd top = Eigen::VectorXd::Zero(state_dim());
    for (int j = 0; j < a_.outerSize(); ++j)
      for (SparseMat::InnerIterator it(a_, j); it; ++it)
        top[it.row()] += std::abs(it.value());
    top += b_.cwiseAbs().rowwise().sum();
    double norm = top.size() > 0 ? top.maxCoeff() : 0.0;
    if (c_.rows() > 0)
      norm = std::max(norm, c_.cwiseAbs().rowwise().sum().maxCoeff());
    return norm;
  }

  std::vector<DenseMat> poly_;
  SparseMat a_;
  DenseMat b_, c_;
  double combined_norm_ = 0.0;
};

/// One low-rank partial-fraction term (p(s)/d(s)) L U^*, with d monic of
/// degree k_j and deg p < k_j. Coefficients are stored lowest degree first.
struct PartialFractionTerm {
  DenseVec p;
  DenseVec d;
  DenseMat l;
  DenseMat u;
};

struct PartialFractionRep {
  std::vector<DenseMat> poly;
  std::vector<PartialFractionTerm> terms;
};

/// Minimal state-space realization of the proper part: per term, the
/// controllable companion form of d_j is expanded r_j-fold (Kronecker with
/// I_{r_j}), fed through U_j^* on the input side and L_j on the output side.
/// The state dimension is exactly sum_j r_j * k_j.
inline StateSpaceRep realize(const PartialFractionRep& pf) {
  if (pf.terms.empty())
    throw Error("realize: at least one partial-fraction term is required");

  Index n = pf.terms.front().l.rows();
  Index k_total = 0;
  for (const auto& t : pf.terms) {
    Index deg = t.d.size() - 1;
    if (deg < 1) throw Error("realize: denominator degree must be >= 1");
    if (std::abs(t.d(deg) - Complex(1, 0)) > 1e-12)
      throw Error("realize: denominator must be monic");
    if (t.p.size() > deg)
      throw Error("realize: numerator degree must be below denominator degree");
    if (t.l.rows() != n || t.u.rows() != n || t.l.cols() != t.u.cols())
      throw Error("realize: low-rank factor dimensions are inconsistent");
    k_total += deg * t.l.cols();
  }

  std::vector<Eigen::Triplet<Complex>> a_trip;
  DenseMat b = DenseMat::Zero(k_total, n);
  DenseMat c = DenseMat::Zero(n, k_total);

  Index offset = 0;
  for (const auto& t : pf.terms) {
    const Index deg = t.d.size() - 1;
    const Index r = t.l.cols();
    for (Index copy = 0; copy < r; ++copy) {
      const Index base = offset + copy * deg;
      // companion block: superdiagonal ones, last row -d_0 .. -d_{deg-1}
      for (Index i = 0; i + 1 < deg; ++i)
        a_trip.emplace_back(static_cast<int>(base + i),
                            static_cast<int>(base + i + 1), Complex(1, 0));
      for (Index i = 0; i < deg; ++i)
        if (t.d(i) != Complex(0, 0))
          a_trip.emplace_back(static_cast<int>(base + deg - 1),
                              static_cast<int>(base + i), -t.d(i));
      // input: last state of the chain carries u_copy^*
      b.row(base + deg - 1) = t.u.col(copy).adjoint();
      // output: numerator coefficients weight the chain into l_copy
      for (Index i = 0; i < t.p.size(); ++i)
        c.col(base + i) += t.p(i) * t.l.col(copy);
    }
    offset += deg * r;
  }

  SparseMat a(k_total, k_total);
  a.setFromTriplets(a_trip.begin(), a_trip.end());
  return StateSpaceRep(pf.poly, std::move(a), std::move(b), std::move(c));
}

/// R(s) = P(s) + C (sI - A)^{-1} B evaluated densely.
inline DenseMat eval_r(const StateSpaceRep& sys, Complex s) {
  DenseMat out = sys.poly().empty()
                     ? DenseMat::Zero(sys.io_dim(), sys.io_dim()).eval()
                     : sys.poly_eval(s);
  SparseMat shifted = -shifted_identity(sys.a(), s);  // sI - A
  try {
    Factorization f(shifted, s);
    out += sys.c() * f.solve(sys.b());
  } catch (const SingularMatrixError&) {
    throw PoleError("eval_r: shift is an eigenvalue of A", s);
  }
  return out;
}

/// j-th derivative of R: P^{(j)}(s) + (-1)^j j! C (sI - A)^{-(j+1)} B.
inline DenseMat eval_r_derivative(const StateSpaceRep& sys, Complex s,
                                  Index order) {
  if (order == 0) return eval_r(sys, s);
  DenseMat out = sys.poly().empty()
                     ? DenseMat::Zero(sys.io_dim(), sys.io_dim()).eval()
                     : sys.poly_eval(s, order);
  SparseMat shifted = -shifted_identity(sys.a(), s);
  try {
    Factorization f(shifted, s);
    DenseMat x = f.solve(sys.b());
    double factor = 1.0;
    for (Index j = 1; j <= order; ++j) {
      x = f.solve(x);
      factor *= -double(j);
    }
    out += factor * (sys.c() * x);
  } catch (const SingularMatrixError&) {
    throw PoleError("eval_r_derivative: shift is an eigenvalue of A", s);
  }
  return out;
}

/// The linear pencil Acal - s Bcal of size k + n*d equivalent to R, with
/// F = I_k. Bcal's trailing block rows are -P_d, -I, ..., -I.
struct Linearization {
  SparseMat acal;
  SparseMat bcal;
  Index state_dim = 0;  // k
  Index io_dim = 0;     // n
  Index degree = 0;     // d (>= 1)
};

inline Linearization build_linearization(const StateSpaceRep& sys) {
  const Index k = sys.state_dim();
  const Index n = sys.io_dim();
  const Index d = sys.lin_degree();
  const Index total = k + n * d;

  auto poly_coeff = [&](Index j) -> DenseMat {
    if (j < static_cast<Index>(sys.poly().size())) return sys.poly()[j];
    return DenseMat::Zero(n, n);
  };

  std::vector<Eigen::Triplet<Complex>> at, bt;
  auto add_dense = [](std::vector<Eigen::Triplet<Complex>>& t,
                      const DenseMat& m, Index r0, Index c0) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i)
        if (m(i, j) != Complex(0, 0))
          t.emplace_back(static_cast<int>(r0 + i), static_cast<int>(c0 + j),
                         m(i, j));
  };

  // Acal: [A .. B | C P_{d-1} .. P_0 | -I subdiagonal chain]
  for (int j = 0; j < sys.a().outerSize(); ++j)
    for (SparseMat::InnerIterator it(sys.a(), j); it; ++it)
      at.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                      it.value());
  add_dense(at, sys.b(), 0, k + n * (d - 1));
  add_dense(at, sys.c(), k, 0);
  for (Index blk = 0; blk < d; ++blk)
    add_dense(at, poly_coeff(d - 1 - blk), k, k + n * blk);
  for (Index blk = 0; blk + 1 < d; ++blk)
    for (Index i = 0; i < n; ++i)
      at.emplace_back(static_cast<int>(k + n * (blk + 1) + i),
                      static_cast<int>(k + n * blk + i), Complex(-1, 0));

  // Bcal: [I_k | -P_d | -I ... -I]
  for (Index i = 0; i < k; ++i)
    bt.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex(1, 0));
  add_dense(bt, -poly_coeff(d), k, k);
  for (Index blk = 1; blk < d; ++blk)
    for (Index i = 0; i < n; ++i)
      bt.emplace_back(static_cast<int>(k + n * blk + i),
                      static_cast<int>(k + n * blk + i), Complex(-1, 0));

  Linearization lin;
  lin.acal.resize(total, total);
  lin.acal.setFromTriplets(at.begin(), at.end());
  lin.bcal.resize(total, total);
  lin.bcal.setFromTriplets(bt.begin(), bt.end());
  lin.state_dim = k;
  lin.io_dim = n;
  lin.degree = d;
  return lin;
}

/// Relative residual of a Ritz pair of the reduced pencil, measured on the
/// full pencil:
///   ||L(lambda) diag(V, I_{nd}) v||_inf / ||v||_inf
///   ------------------------------------------------
///        |lambda| + ||[[A, B], [C, 0]]||_inf
/// The norm in the denominator is the induced infinity norm and is cached on
/// the system.
inline double residual_rational(const StateSpaceRep& sys,
                                const Linearization& lin, Complex lambda,
                                const DenseVec& v_reduced, const DenseMat& v_basis) {
  const Index nd = lin.io_dim * lin.degree;
  const Index r = v_basis.cols();
  if (v_reduced.size() != r + nd)
    throw Error("residual_rational: reduced vector has wrong length");
  double vnorm = v_reduced.lpNorm<Eigen::Infinity>();
  if (!(vnorm > 0)) throw Error("residual_rational: zero vector");

  DenseVec embedded(lin.state_dim + nd);
  embedded.head(lin.state_dim) = v_basis * v_reduced.head(r);
  embedded.tail(nd) = v_reduced.tail(nd);

  DenseVec resid = lin.acal * embedded - lambda * (lin.bcal * embedded);
  double numer = resid.lpNorm<Eigen::Infinity>() / vnorm;
  return numer / (std::abs(lambda) + sys.combined_inf_norm());
}

}  // namespace nepspace
