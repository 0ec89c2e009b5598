// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "nepspace/dense.hpp"
#include "nepspace/scalar_fn.hpp"
#include "nepspace/sparse.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

struct SplitTerm {
  ScalarFn fn;
  SparseMat t;
};

/// Split-form nonlinear eigenproblem T(s) = sum_j f_j(s) T_j. The induced
/// infinity norms ||T_j||_inf are cached at construction for the residual
/// denominator. Immutable after construction.
class SplitNep {
public:
  explicit SplitNep(std::vector<SplitTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw Error("SplitNep: at least one term required");
    n_ = terms_.front().t.rows();
    for (auto& t : terms_) {
      if (t.t.rows() != n_ || t.t.cols() != n_)
        throw Error("SplitNep: all terms must be square and of equal size");
      t.t.makeCompressed();
      term_norms_.push_back(inf_norm(t.t));
    }
  }

  Index size() const { return n_; }
  const std::vector<SplitTerm>& terms() const { return terms_; }
  const std::vector<double>& term_norms() const { return term_norms_; }

  SparseMat eval_sparse(Complex s) const {
    SparseMat acc = terms_.front().fn(s) * terms_.front().t;
    for (std::size_t j = 1; j < terms_.size(); ++j)
      acc = acc + terms_[j].fn(s) * terms_[j].t;
    acc.makeCompressed();
    return acc;
  }

  DenseMat eval_dense(Complex s) const { return DenseMat(eval_sparse(s)); }

  /// T(s) * X without assembling T(s).
  DenseMat apply(Complex s, const DenseMat& x) const {
    DenseMat acc = DenseMat::Zero(n_, x.cols());
    for (const auto& t : terms_) acc += t.fn(s) * (t.t * x);
    return acc;
  }

  /// sum_j |f_j(s)| ||T_j||_inf, the termination-formula denominator.
  double coefficient_scale(Complex s) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < terms_.size(); ++j)
      acc += std::abs(terms_[j].fn(s)) * term_norms_[j];
    return acc;
  }

private:
  std::vector<SplitTerm> terms_;
  std::vector<double> term_norms_;
  Index n_ = 0;
};

/// Derivatives of the blocks of a partitioned T at one point.
struct BlockDerivs {
  std::vector<SparseMat> a;  // A^{(i)}(s), k x k
  std::vector<DenseMat> b;   // B^{(i)}(s), k x m
  std::vector<DenseMat> c;   // C^{(i)}(s), m x k
  DenseMat d;                // D(s), m x m
};

/// Applies a symmetric row/column permutation: entry (i, j) of the result is
/// entry (perm[i], perm[j]) of the input. Used at ingestion to steer which
/// rows end up in the trailing partition block.
inline SplitNep permute_split(const SplitNep& nep,
                              const std::vector<Index>& perm) {
  const Index n = nep.size();
  if (static_cast<Index>(perm.size()) != n)
    throw Error("permute_split: permutation length mismatch");
  std::vector<Index> pos(n, -1);
  for (Index i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n || pos[perm[i]] != -1)
      throw Error("permute_split: invalid permutation");
    pos[perm[i]] = i;
  }
  std::vector<SplitTerm> terms;
  terms.reserve(nep.terms().size());
  for (const auto& t : nep.terms()) {
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(t.t.nonZeros());
    for (int col = 0; col < t.t.outerSize(); ++col)
      for (SparseMat::InnerIterator it(t.t, col); it; ++it)
        trip.emplace_back(static_cast<int>(pos[it.row()]),
                          static_cast<int>(pos[it.col()]), it.value());
    SparseMat pt(n, n);
    pt.setFromTriplets(trip.begin(), trip.end());
    terms.push_back({t.fn, std::move(pt)});
  }
  return SplitNep(std::move(terms));
}

/// 2x2 block partition of a split problem: the leading k x k block becomes
/// A(s), the trailing m rows/columns form B(s), C(s), D(s).
class PartitionedNep {
public:
  PartitionedNep(std::shared_ptr<const SplitNep> parent, Index m)
      : parent_(std::move(parent)), m_(m) {
    const Index n = parent_->size();
    if (m_ < 1 || m_ >= n)
      throw Error("PartitionedNep: partition size must satisfy 1 <= m < n");
    k_ = n - m_;
    split_blocks();
  }

  Index k() const { return k_; }
  Index m() const { return m_; }
  const SplitNep& parent() const { return *parent_; }

  const std::vector<SparseMat>& a_blocks() const { return a_; }
  const std::vector<DenseMat>& b_blocks() const { return b_; }
  const std::vector<DenseMat>& c_blocks() const { return c_; }
  const std::vector<DenseMat>& d_blocks() const { return d_; }

  /// f_j^{(i)}(s) for every term, i <= up_to.
  std::vector<std::vector<Complex>> fn_table(Complex s, int up_to) const {
    std::vector<std::vector<Complex>> table;
    table.reserve(parent_->terms().size());
    for (const auto& t : parent_->terms()) table.push_back(t.fn.derivs(s, up_to));
    return table;
  }

  BlockDerivs eval_blocks(Complex s, int up_to) const {
    auto table = fn_table(s, up_to);
    BlockDerivs out;
    out.a.reserve(up_to + 1);
    out.b.reserve(up_to + 1);
    out.c.reserve(up_to + 1);
    for (int i = 0; i <= up_to; ++i) {
      SparseMat ai = table[0][i] * a_[0];
      DenseMat bi = table[0][i] * b_[0];
      DenseMat ci = table[0][i] * c_[0];
      for (std::size_t j = 1; j < a_.size(); ++j) {
        ai = ai + table[j][i] * a_[j];
        bi += table[j][i] * b_[j];
        ci += table[j][i] * c_[j];
      }
      ai.makeCompressed();
      out.a.push_back(std::move(ai));
      out.b.push_back(std::move(bi));
      out.c.push_back(std::move(ci));
    }
    out.d = table[0][0] * d_[0];
    for (std::size_t j = 1; j < d_.size(); ++j) out.d += table[j][0] * d_[j];
    return out;
  }

private:
  void split_blocks() {
    const auto& terms = parent_->terms();
    a_.resize(terms.size());
    b_.assign(terms.size(), DenseMat::Zero(k_, m_));
    c_.assign(terms.size(), DenseMat::Zero(m_, k_));
    d_.assign(terms.size(), DenseMat::Zero(m_, m_));

    for (std::size_t j = 0; j < terms.size(); ++j) {
      std::vector<Eigen::Triplet<Complex>> at;
      for (int col = 0; col < terms[j].t.outerSize(); ++col)
        for (SparseMat::InnerIterator it(terms[j].t, col); it; ++it) {
          Index r = it.row();
          Index c = it.col();
          if (r < k_ && c < k_)
            at.emplace_back(static_cast<int>(r), static_cast<int>(c),
                            it.value());
          else if (r < k_)
            b_[j](r, c - k_) += it.value();
          else if (c < k_)
            c_[j](r - k_, c) += it.value();
          else
            d_[j](r - k_, c - k_) += it.value();
        }
      a_[j].resize(k_, k_);
      a_[j].setFromTriplets(at.begin(), at.end());
      a_[j].makeCompressed();
    }
  }

  std::shared_ptr<const SplitNep> parent_;
  Index m_, k_;
  std::vector<SparseMat> a_;
  std::vector<DenseMat> b_, c_, d_;
};

/// Derivative chains of X(s) = A(s)^{-1} B(s) and of the adjoint
/// Y(s) = (C(s) A(s)^{-1})^*, sharing a single factorization of A(s).
struct DerivativeChains {
  std::vector<DenseMat> x;  // X^{(0)} .. X^{(q-1)}, k x m
  std::vector<DenseMat> y;  // adjoint chain, k x m (empty when not requested)
};

/// Leibniz recurrence
///   X^{(j)} = A^{-1} (B^{(j)} - sum_{i=1..j} binom(j,i) A^{(i)} X^{(j-i)}),
/// and the adjoint analogue driven by C instead of B. One factorization of
/// A(s) serves both chains.
inline DerivativeChains solve_chain(const PartitionedNep& p, Complex s, int q,
                                    bool with_adjoint = true) {
  if (q < 1) throw Error("solve_chain: q must be >= 1");
  BlockDerivs blocks = p.eval_blocks(s, q - 1);
  std::unique_ptr<Factorization> fact;
  try {
    fact = std::make_unique<Factorization>(blocks.a[0], s);
  } catch (const SingularMatrixError&) {
    throw PoleError("solve_chain: A(s) is singular", s);
  }
  auto binom = detail::binomials(q - 1);

  DerivativeChains out;
  out.x.reserve(q);
  for (int j = 0; j < q; ++j) {
    DenseMat rhs = blocks.b[j];
    for (int i = 1; i <= j; ++i)
      rhs -= binom[j][i] * (blocks.a[i] * out.x[j - i]);
    out.x.push_back(fact->solve(rhs));
  }
  if (with_adjoint) {
    out.y.reserve(q);
    for (int j = 0; j < q; ++j) {
      DenseMat rhs = blocks.c[j].adjoint();
      for (int i = 1; i <= j; ++i)
        rhs -= binom[j][i] * (SparseMat(blocks.a[i].adjoint()) * out.y[j - i]);
      out.y.push_back(fact->solve(rhs, /*adjoint=*/true));
    }
  }
  return out;
}

/// Relative residual of a Ritz pair of the reduced split problem:
///   ||T(lambda) diag(V, I_m) v||_inf / ||v||_inf
///   --------------------------------------------
///     sum_j |f_j(lambda)| ||T_j||_inf
/// The literal formula divides by the norm of the reduced vector v; the
/// embedded vector's norm can be used instead via use_embedded_norm.
inline double residual_split(const SplitNep& nep, Complex lambda,
                             const DenseVec& v_reduced, const DenseMat& v_basis,
                             Index m, bool use_embedded_norm = false) {
  const Index r = v_basis.cols();
  if (v_reduced.size() != r + m)
    throw Error("residual_split: reduced vector has wrong length");
  DenseVec embedded(v_basis.rows() + m);
  embedded.head(v_basis.rows()) = v_basis * v_reduced.head(r);
  embedded.tail(m) = v_reduced.tail(m);
  double vnorm = use_embedded_norm ? embedded.lpNorm<Eigen::Infinity>()
                                   : v_reduced.lpNorm<Eigen::Infinity>();
  if (!(vnorm > 0)) throw Error("residual_split: zero vector");
  double numer =
      nep.apply(lambda, embedded).lpNorm<Eigen::Infinity>() / vnorm;
  return numer / nep.coefficient_scale(lambda);
}

}  // namespace nepspace
