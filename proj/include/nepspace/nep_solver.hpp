// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "nepspace/dense.hpp"
#include "nepspace/nep.hpp"
#include "nepspace/report.hpp"
#include "nepspace/small_nep.hpp"
#include "nepspace/solver_detail.hpp"

namespace nepspace {

/// Right and left expansion directions at mu: the derivative chains
/// X^{(j)}(mu) of A(s)^{-1} B(s) and the adjoint chain of (C(s) A(s)^{-1})^*
/// for j = 0 .. q-1. One factorization of A(mu) serves both chains. In
/// one-sided mode the left block is empty.
inline std::pair<DenseMat, DenseMat> expand_nep(const PartitionedNep& p,
                                                Complex mu, int q, Mode mode) {
  if (q < (mode == Mode::TwoSided ? 2 : 3))
    throw Error("expand_nep: q too small for the requested mode");
  DerivativeChains chains = solve_chain(p, mu, q, mode == Mode::TwoSided);
  const Index k = p.k();
  const Index m = p.m();
  DenseMat right(k, m * q), left;
  for (int j = 0; j < q; ++j) right.middleCols(j * m, m) = chains.x[j];
  if (mode == Mode::TwoSided) {
    left.resize(k, m * q);
    for (int j = 0; j < q; ++j) left.middleCols(j * m, m) = chains.y[j];
  }
  return {std::move(right), std::move(left)};
}

/// Projected blocks of the reduced split problem (3.4): per term,
/// W* A_j V, W* B_j, C_j V and D_j, sharing the parent's scalar functions.
/// Extensions only compute the new rows and columns; A_j V is cached per
/// term for that purpose.
class ReducedSplitNep {
public:
  explicit ReducedSplitNep(const PartitionedNep& part) : part_(&part) {
    const std::size_t nterms = part.a_blocks().size();
    wav_.assign(nterms, DenseMat(0, 0));
    wb_.assign(nterms, DenseMat(0, part.m()));
    cv_.assign(nterms, DenseMat(part.m(), 0));
    av_.assign(nterms, DenseMat(part.k(), 0));
    v_.resize(part.k(), 0);
    w_.resize(part.k(), 0);
  }

  Index dim() const { return v_.cols(); }
  Index m() const { return part_->m(); }
  const DenseMat& v() const { return v_; }
  const DenseMat& w() const { return w_; }
  const PartitionedNep& partition() const { return *part_; }
  const std::vector<DenseMat>& wav_blocks() const { return wav_; }
  const std::vector<DenseMat>& wb_blocks() const { return wb_; }
  const std::vector<DenseMat>& cv_blocks() const { return cv_; }

  void extend(const DenseMat& v_add, const DenseMat& w_add) {
    const Index rv = v_.cols(), dv = v_add.cols();
    const Index rw = w_.cols(), dw = w_add.cols();
    if (rv + dv != rw + dw)
      throw Error("ReducedSplitNep: left/right bases must grow to equal width");
    if (dv == 0 && dw == 0) return;
    const auto& terms = part_->parent().terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      DenseMat av_add = part_->a_blocks()[j] * v_add;
      wav_[j].conservativeResize(rw + dw, rv + dv);
      if (rw > 0 && dv > 0)
        wav_[j].topRightCorner(rw, dv) = w_.adjoint() * av_add;
      av_[j].conservativeResize(Eigen::NoChange, rv + dv);
      av_[j].rightCols(dv) = av_add;
      if (dw > 0) {
        wav_[j].bottomRows(dw) = w_add.adjoint() * av_[j];
        wb_[j].conservativeResize(rw + dw, Eigen::NoChange);
        wb_[j].bottomRows(dw) = w_add.adjoint() * part_->b_blocks()[j];
      }
      cv_[j].conservativeResize(Eigen::NoChange, rv + dv);
      cv_[j].rightCols(dv) = part_->c_blocks()[j] * v_add;
    }
    v_.conservativeResize(Eigen::NoChange, rv + dv);
    v_.rightCols(dv) = v_add;
    w_.conservativeResize(Eigen::NoChange, rw + dw);
    w_.rightCols(dw) = w_add;
  }

  /// Recomputes every block from the bases (cross-check for the incremental
  /// path).
  void rebuild() {
    const auto& terms = part_->parent().terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      av_[j] = part_->a_blocks()[j] * v_;
      wav_[j] = w_.adjoint() * av_[j];
      wb_[j] = w_.adjoint() * part_->b_blocks()[j];
      cv_[j] = part_->c_blocks()[j] * v_;
    }
  }

  /// T^{W,V}(s), size r + m.
  DenseMat eval_t(Complex s) const {
    const Index r = dim(), mm = part_->m();
    DenseMat out = DenseMat::Zero(r + mm, r + mm);
    const auto& terms = part_->parent().terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      Complex f = terms[j].fn(s);
      out.topLeftCorner(r, r) += f * wav_[j];
      out.topRightCorner(r, mm) += f * wb_[j];
      out.bottomLeftCorner(mm, r) += f * cv_[j];
      out.bottomRightCorner(mm, mm) += f * part_->d_blocks()[j];
    }
    return out;
  }

  /// A^{W,V}(s), the middle block used by the pole filter.
  DenseMat eval_a(Complex s) const {
    const Index r = dim();
    DenseMat out = DenseMat::Zero(r, r);
    const auto& terms = part_->parent().terms();
    for (std::size_t j = 0; j < terms.size(); ++j)
      out += terms[j].fn(s) * wav_[j];
    return out;
  }

  bool is_polynomial() const {
    for (const auto& t : part_->parent().terms())
      if (!t.fn.is_polynomial()) return false;
    return true;
  }

  /// Coefficient matrices of the reduced matrix polynomial (only valid when
  /// is_polynomial()).
  std::vector<DenseMat> poly_coeffs() const {
    const Index r = dim(), mm = part_->m();
    const auto& terms = part_->parent().terms();
    int degree = 0;
    for (const auto& t : terms) degree = std::max(degree, t.fn.poly_degree());
    std::vector<DenseMat> coeffs(degree + 1,
                                 DenseMat::Zero(r + mm, r + mm));
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const ScalarFn& fn = terms[j].fn;
      Complex scale = fn.kind() == ScalarFn::Kind::Constant ? fn.param()
                                                            : Complex(1, 0);
      DenseMat block(r + mm, r + mm);
      block.topLeftCorner(r, r) = wav_[j];
      block.topRightCorner(r, mm) = wb_[j];
      block.bottomLeftCorner(mm, r) = cv_[j];
      block.bottomRightCorner(mm, mm) = part_->d_blocks()[j];
      coeffs[fn.poly_degree()] += scale * block;
    }
    return coeffs;
  }

private:
  const PartitionedNep* part_;
  DenseMat v_, w_;
  std::vector<DenseMat> av_;
  std::vector<DenseMat> wav_, wb_, cv_;
};

inline ReducedSplitNep assemble_reduced(const PartitionedNep& p,
                                        const DenseMat& v, const DenseMat& w) {
  ReducedSplitNep red(p);
  red.extend(v, w);
  return red;
}

struct ReducedSolveSettings {
  double radius = 1.0;  // contour radius around tau (non-polynomial path)
  int nodes = 64;
  int probes = 8;
  double filter_tol = 1e-8;
  int max_retries = 3;
};

/// Eigenvalues of the reduced split problem closest to tau, after the
/// Section-4 pole filter. Polynomial problems take the companion route; the
/// rest go through the contour solver on a disk around tau, retrying with a
/// doubled radius and extra probe columns when the contour solver cannot
/// produce candidates.
inline std::vector<EigPair> solve_reduced(const ReducedSplitNep& red,
                                          Complex tau, int want,
                                          const ReducedSolveSettings& settings,
                                          Rng& rng,
                                          std::vector<std::string>* notes =
                                              nullptr) {
  if (red.dim() + red.m() < 1) throw Error("solve_reduced: empty problem");
  std::vector<EigPair> raw;
  if (red.is_polynomial()) {
    raw = companion_eigs(red.poly_coeffs(), tau, 0);
  } else {
    Contour c;
    c.center = tau;
    c.radius = settings.radius;
    c.nodes = settings.nodes;
    c.probe_cols = settings.probes;
    for (int attempt = 0;; ++attempt) {
      try {
        raw = contour_eigs([&](Complex s) { return red.eval_t(s); }, c, 0, tau,
                           rng);
      } catch (const ContourRankError&) {
        raw.clear();
        c.probe_cols += 4;
      }
      if (static_cast<int>(raw.size()) >= want || attempt >= settings.max_retries)
        break;
      c.radius *= 2.0;
      if (notes)
        notes->push_back("reduced contour solve retried with radius " +
                         std::to_string(c.radius) + " and " +
                         std::to_string(c.probe_cols) + " probes");
    }
  }

  std::vector<EigPair> out;
  out.reserve(raw.size());
  for (auto& cand : raw) {
    DenseMat a_red = red.eval_a(cand.lambda);
    if (red.dim() > 0 && smallest_singular_value(a_red) <=
                             settings.filter_tol * inf_norm(a_red))
      continue;  // likely a pole of the reduced rational function
    out.push_back(std::move(cand));
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](const EigPair& a, const EigPair& b) {
                     return solver_detail::closer_to(a.lambda, b.lambda, tau);
                   });
  if (want > 0 && static_cast<int>(out.size()) > want) out.resize(want);
  return out;
}

/// Algorithm-2-style interpolatory subspace iteration for split-form
/// problems T(s) = sum_j f_j(s) T_j, partitioned with trailing block size m.
inline SolveReport solve_nep(const SplitNep& nep, Complex tau, int k_eigs,
                             Strategy strategy, const SolveOptions& opts) {
  solver_detail::validate_common(k_eigs, opts);
  const int q = opts.effective_q();
  const bool two_sided = opts.mode == Mode::TwoSided;
  auto parent = std::make_shared<SplitNep>(nep);
  PartitionedNep part(parent, opts.partition);
  const Index m = part.m();

  Rng rng(opts.seed);
  const std::uint64_t fact0 = counters::factorizations();
  const std::uint64_t solve0 = counters::block_solves();
  const std::uint64_t adj0 = counters::adjoint_block_solves();

  SolveReport report;
  solver_detail::ExpansionCache cache;
  ReducedSplitNep red(part);

  auto expand_at = [&](Complex mu) {
    const solver_detail::ExpansionCache::Entry* entry = cache.find(mu);
    if (entry == nullptr) {
      Complex used = mu;
      for (int attempt = 0;; ++attempt) {
        try {
          auto dirs = expand_nep(part, used, q, opts.mode);
          entry = &cache.insert(used, std::move(dirs.first),
                                std::move(dirs.second));
          break;
        } catch (const PoleError&) {
          if (attempt >= 3) throw;
          used = used * (1.0 + 1e-8) + Complex(0, 1e-8);
          report.notes.push_back(
              "interpolation point perturbed off a singularity of A(s)");
        }
      }
    }
    DenseMat grown_v = orthonormal_extend(red.v(), entry->vdirs, opts.drop_tol);
    DenseMat add_v = grown_v.rightCols(grown_v.cols() - red.v().cols());
    DenseMat add_w;
    if (two_sided) {
      DenseMat grown_w = orthonormal_extend(red.w(), entry->wdirs, opts.drop_tol);
      add_w = grown_w.rightCols(grown_w.cols() - red.w().cols());
      // keep both subspaces the same width when drops are one-sided
      Index d = std::min(add_v.cols(), add_w.cols());
      add_v = add_v.leftCols(d).eval();
      add_w = add_w.leftCols(d).eval();
    } else {
      add_w = add_v;
    }
    red.extend(add_v, add_w);
  };

  double radius = opts.init_radius > 0 ? opts.init_radius
                                       : solver_detail::default_init_radius(tau);
  std::vector<Complex> points = opts.init_points;
  if (points.empty()) {
    int per_point = static_cast<int>(m) * q;
    int count = (k_eigs + per_point - 1) / per_point;
    points = solver_detail::initial_points(tau, radius, count, rng);
  }

  // Contour radius for the reduced solves: twice the initial point spread,
  // floored by the configured radius.
  double spread = 0.0;
  for (Complex p : points)
    if (std::abs(p - tau) > 0)
      spread = spread == 0.0 ? std::abs(p - tau)
                             : std::min(spread, std::abs(p - tau));
  ReducedSolveSettings rss;
  rss.radius = std::max(2.0 * spread,
                        opts.contour_radius > 0 ? opts.contour_radius : radius);
  rss.nodes = opts.contour_nodes;
  rss.probes = k_eigs + 4;
  rss.filter_tol = opts.filter_tol;

  std::vector<EigPair> last_candidates;
  std::vector<double> last_residuals;
  bool converged = false;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    auto t_start = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iter = iter;
    rec.interp_points = points;
    for (Complex mu : points) expand_at(mu);

    if (iter == 0) {
      int guard = 0;
      while (red.dim() < k_eigs && guard++ < 20) {
        Complex extra = tau + radius * rng.complex_normal();
        rec.interp_points.push_back(extra);
        expand_at(extra);
      }
      if (red.dim() < k_eigs)
        throw Error("solve_nep: could not build an initial subspace of size " +
                    std::to_string(k_eigs));
    }
    if (opts.debug_full_rebuild) red.rebuild();

    std::vector<EigPair> candidates =
        solve_reduced(red, tau, k_eigs, rss, rng, &report.notes);
    if (candidates.empty()) throw Error("solve_nep: reduced spectrum empty");

    rec.candidates.clear();
    last_residuals.clear();
    for (const auto& cand : candidates) {
      double res = residual_split(nep, cand.lambda, cand.v, red.v(), m,
                                  opts.use_embedded_norm);
      rec.candidates.push_back({cand.lambda, res, false});
      last_residuals.push_back(res);
    }
    last_candidates = candidates;

    rec.subspace_dim = red.dim();
    rec.factorizations = counters::factorizations() - fact0;
    rec.solves = counters::block_solves() - solve0;
    rec.adjoint_solves = counters::adjoint_block_solves() - adj0;

    converged = static_cast<int>(candidates.size()) == k_eigs &&
                std::all_of(last_residuals.begin(), last_residuals.end(),
                            [&](double r) { return r < opts.tol; });

    std::vector<Complex> next_points;
    if (!converged) {
      auto chosen = solver_detail::select_interpolation(rec.candidates,
                                                        strategy, opts.tol);
      for (std::size_t idx : chosen) {
        rec.candidates[idx].interpolated_next = true;
        next_points.push_back(rec.candidates[idx].lambda);
      }
      if (next_points.empty()) {
        next_points.push_back(tau + radius * rng.complex_normal());
        report.notes.push_back("subspace enriched at a fresh random point");
      }
    }

    rec.elapsed_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
    report.iterations.push_back(std::move(rec));
    if (converged) break;
    points = std::move(next_points);
  }

  report.converged = converged;
  report.iterations_used = static_cast<int>(report.iterations.size());
  report.total_factorizations = counters::factorizations() - fact0;
  report.total_solves = counters::block_solves() - solve0;
  report.total_adjoint_solves = counters::adjoint_block_solves() - adj0;
  report.final_v = red.v();
  report.final_w = red.w();

  for (std::size_t i = 0; i < last_candidates.size(); ++i) {
    EigEstimate est;
    est.lambda = last_candidates[i].lambda;
    est.v_reduced = last_candidates[i].v;
    DenseVec full(part.k() + m);
    full.head(part.k()) = red.v() * est.v_reduced.head(red.dim());
    full.tail(m) = est.v_reduced.tail(m);
    double scale = full.lpNorm<Eigen::Infinity>();
    est.v_full = scale > 0 ? (full / scale).eval() : full;
    est.residual = last_residuals[i];
    est.converged = est.residual < opts.tol;
    report.eigenvalues.push_back(std::move(est));
  }
  return report;
}

}  // namespace nepspace
