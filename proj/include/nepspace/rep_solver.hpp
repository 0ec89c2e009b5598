// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "nepspace/dense.hpp"
#include "nepspace/rep.hpp"
#include "nepspace/report.hpp"
#include "nepspace/solver_detail.hpp"
#include "nepspace/sparse.hpp"

namespace nepspace {

/// Orthonormal right/left projection bases of equal width. In one-sided mode
/// W is the same matrix as V.
struct ProjectionPair {
  DenseMat v;
  DenseMat w;
  Mode mode = Mode::TwoSided;
};

/// Right directions (A - mu I)^{-1} B, ..., (A - mu I)^{-q} B and the adjoint
/// chain (A - mu I)^{-*j} C^*, from one factorization.
inline std::pair<DenseMat, DenseMat> expand_two_sided(const StateSpaceRep& sys,
                                                      Complex mu, int q) {
  if (q < 2) throw Error("expand_two_sided: q must be >= 2");
  const Index k = sys.state_dim();
  const Index n = sys.io_dim();
  SparseMat shifted = shifted_identity(sys.a(), mu);  // A - mu I
  DenseMat vdirs(k, n * q), wdirs(k, n * q);
  try {
    Factorization f(shifted, mu);
    DenseMat x = sys.b();
    DenseMat y = sys.c().adjoint();
    for (int j = 0; j < q; ++j) {
      x = f.solve(x);
      y = f.solve(y, /*adjoint=*/true);
      vdirs.middleCols(j * n, n) = x;
      wdirs.middleCols(j * n, n) = y;
    }
  } catch (const SingularMatrixError&) {
    throw PoleError("expand: shift is an eigenvalue of A", mu);
  }
  return {std::move(vdirs), std::move(wdirs)};
}

inline DenseMat expand_one_sided(const StateSpaceRep& sys, Complex mu, int q) {
  if (q < 3) throw Error("expand_one_sided: q must be >= 3");
  const Index k = sys.state_dim();
  const Index n = sys.io_dim();
  SparseMat shifted = shifted_identity(sys.a(), mu);
  DenseMat vdirs(k, n * q);
  try {
    Factorization f(shifted, mu);
    DenseMat x = sys.b();
    for (int j = 0; j < q; ++j) {
      x = f.solve(x);
      vdirs.middleCols(j * n, n) = x;
    }
  } catch (const SingularMatrixError&) {
    throw PoleError("expand: shift is an eigenvalue of A", mu);
  }
  return vdirs;
}

/// Projected blocks W*AV, W*B, CV, W*V of the reduced pencil, grown
/// incrementally as the bases gain columns. A*V is cached so that an
/// extension touches only the new rows and columns.
class ReducedRep {
public:
  explicit ReducedRep(const StateSpaceRep& sys) : sys_(&sys) {
    const Index n = sys.io_dim();
    wav_.resize(0, 0);
    wv_.resize(0, 0);
    wb_.resize(0, n);
    cv_.resize(n, 0);
    av_.resize(sys.state_dim(), 0);
    v_.resize(sys.state_dim(), 0);
    w_.resize(sys.state_dim(), 0);
  }

  Index dim() const { return v_.cols(); }
  const DenseMat& v() const { return v_; }
  const DenseMat& w() const { return w_; }
  const DenseMat& wav() const { return wav_; }
  const DenseMat& wv() const { return wv_; }
  const DenseMat& wb() const { return wb_; }
  const DenseMat& cv() const { return cv_; }

  void extend(const DenseMat& v_add, const DenseMat& w_add) {
    const Index rv = v_.cols(), dv = v_add.cols();
    const Index rw = w_.cols(), dw = w_add.cols();
    if (rv + dv != rw + dw)
      throw Error("ReducedRep: left/right bases must grow to equal width");
    if (dv == 0 && dw == 0) return;

    DenseMat av_add = sys_->a() * v_add;

    wav_.conservativeResize(rw + dw, rv + dv);
    if (rw > 0 && dv > 0) wav_.topRightCorner(rw, dv) = w_.adjoint() * av_add;
    wv_.conservativeResize(rw + dw, rv + dv);
    if (rw > 0 && dv > 0) wv_.topRightCorner(rw, dv) = w_.adjoint() * v_add;

    av_.conservativeResize(Eigen::NoChange, rv + dv);
    av_.rightCols(dv) = av_add;
    v_.conservativeResize(Eigen::NoChange, rv + dv);
    v_.rightCols(dv) = v_add;

    if (dw > 0) {
      wav_.bottomRows(dw) = w_add.adjoint() * av_;
      wv_.bottomRows(dw) = w_add.adjoint() * v_;
      wb_.conservativeResize(rw + dw, Eigen::NoChange);
      wb_.bottomRows(dw) = w_add.adjoint() * sys_->b();
      w_.conservativeResize(Eigen::NoChange, rw + dw);
      w_.rightCols(dw) = w_add;
    }
    cv_.conservativeResize(Eigen::NoChange, rv + dv);
    cv_.rightCols(dv) = sys_->c() * v_add;
  }

  /// Recomputes every block from the bases; used to cross-check the
  /// incremental updates.
  void rebuild() {
    av_ = sys_->a() * v_;
    wav_ = w_.adjoint() * av_;
    wv_ = w_.adjoint() * v_;
    wb_ = w_.adjoint() * sys_->b();
    cv_ = sys_->c() * v_;
  }

  /// Dense reduced pencil of size r + n*d laid out like the full
  /// linearization with A, B, C, F replaced by the projected blocks.
  std::pair<DenseMat, DenseMat> pencil() const {
    const Index r = dim();
    const Index n = sys_->io_dim();
    const Index d = sys_->lin_degree();
    const Index total = r + n * d;
    auto poly_coeff = [&](Index j) -> DenseMat {
      if (j < static_cast<Index>(sys_->poly().size())) return sys_->poly()[j];
      return DenseMat::Zero(n, n);
    };

    DenseMat acal = DenseMat::Zero(total, total);
    DenseMat bcal = DenseMat::Zero(total, total);
    acal.topLeftCorner(r, r) = wav_;
    acal.block(0, r + n * (d - 1), r, n) = wb_;
    acal.block(r, 0, n, r) = cv_;
    for (Index blk = 0; blk < d; ++blk)
      acal.block(r, r + n * blk, n, n) = poly_coeff(d - 1 - blk);
    for (Index blk = 0; blk + 1 < d; ++blk)
      acal.block(r + n * (blk + 1), r + n * blk, n, n) =
          -DenseMat::Identity(n, n);

    bcal.topLeftCorner(r, r) = wv_;
    bcal.block(r, r, n, n) = -poly_coeff(d);
    for (Index blk = 1; blk < d; ++blk)
      bcal.block(r + n * blk, r + n * blk, n, n) = -DenseMat::Identity(n, n);
    return {std::move(acal), std::move(bcal)};
  }

private:
  const StateSpaceRep* sys_;
  DenseMat v_, w_;
  DenseMat av_;
  DenseMat wav_, wv_, wb_, cv_;
};

inline std::pair<DenseMat, DenseMat> build_reduced_pencil(
    const StateSpaceRep& sys, const ProjectionPair& proj) {
  ReducedRep red(sys);
  red.extend(proj.v, proj.mode == Mode::OneSided ? proj.v : proj.w);
  return red.pencil();
}

/// Finite eigenpairs of the reduced pencil with the Section-4 pole filter:
/// candidates at which the middle block W*AV - lambda W*V is (nearly)
/// singular may be poles of the reduced rational function and are excluded.
inline std::vector<EigPair> reduced_eigs_filtered(const DenseMat& acal_r,
                                                  const DenseMat& bcal_r,
                                                  Index r,
                                                  double filter_tol = 1e-8) {
  PencilEigs pe = pencil_eigs(acal_r, bcal_r);
  DenseMat wav = acal_r.topLeftCorner(r, r);
  DenseMat wv = bcal_r.topLeftCorner(r, r);
  const double scale = inf_norm(wav);
  std::vector<EigPair> out;
  out.reserve(pe.values.size());
  for (std::size_t i = 0; i < pe.values.size(); ++i) {
    Complex lambda = pe.values[i];
    if (r > 0 &&
        smallest_singular_value(wav - lambda * wv) <= filter_tol * scale)
      continue;
    out.push_back({lambda, pe.vectors.col(static_cast<Index>(i))});
  }
  return out;
}

/// Algorithm-1-style interpolatory subspace iteration for rational problems
/// in transfer-function form: expands Hermite interpolation subspaces at the
/// reduced-pencil eigenvalues closest to tau until the k_eigs relative
/// residuals fall below tol.
inline SolveReport solve_rep(const StateSpaceRep& sys, Complex tau, int k_eigs,
                             Strategy strategy, const SolveOptions& opts) {
  solver_detail::validate_common(k_eigs, opts);
  const int q = opts.effective_q();
  const bool two_sided = opts.mode == Mode::TwoSided;
  const Index n = sys.io_dim();

  Linearization lin = build_linearization(sys);
  Rng rng(opts.seed);
  const std::uint64_t fact0 = counters::factorizations();
  const std::uint64_t solve0 = counters::block_solves();
  const std::uint64_t adj0 = counters::adjoint_block_solves();

  SolveReport report;
  solver_detail::ExpansionCache cache;
  ReducedRep red(sys);

  auto extend_from_dirs = [&](const DenseMat& vdirs, const DenseMat& wdirs) {
    DenseMat grown_v = orthonormal_extend(red.v(), vdirs, opts.drop_tol);
    DenseMat add_v = grown_v.rightCols(grown_v.cols() - red.v().cols());
    DenseMat add_w;
    if (two_sided) {
      DenseMat grown_w = orthonormal_extend(red.w(), wdirs, opts.drop_tol);
      add_w = grown_w.rightCols(grown_w.cols() - red.w().cols());
      // the subspaces must keep equal dimension: a near-dependent column
      // dropped on one side trims the other side's newest direction too
      Index d = std::min(add_v.cols(), add_w.cols());
      add_v = add_v.leftCols(d).eval();
      add_w = add_w.leftCols(d).eval();
    } else {
      add_w = add_v;
    }
    red.extend(add_v, add_w);
  };

  auto expand_at = [&](Complex mu) {
    if (const auto* hit = cache.find(mu)) {
      // cached directions: no factorization, just re-orthonormalize
      extend_from_dirs(hit->vdirs, hit->wdirs);
      return;
    }
    DenseMat vdirs, wdirs;
    Complex used = mu;
    for (int attempt = 0;; ++attempt) {
      try {
        if (two_sided) {
          auto dirs = expand_two_sided(sys, used, q);
          vdirs = std::move(dirs.first);
          wdirs = std::move(dirs.second);
        } else {
          vdirs = expand_one_sided(sys, used, q);
        }
        break;
      } catch (const PoleError&) {
        if (attempt >= 3) throw;
        used = used * (1.0 + 1e-8) + Complex(0, 1e-8);
        report.notes.push_back("interpolation point perturbed off a pole of "
                               "the resolvent");
      }
    }
    const auto& entry = cache.insert(used, std::move(vdirs), std::move(wdirs));
    extend_from_dirs(entry.vdirs, entry.wdirs);
  };

  double radius = opts.init_radius > 0 ? opts.init_radius
                                       : solver_detail::default_init_radius(tau);
  std::vector<Complex> points = opts.init_points;
  if (points.empty()) {
    int per_point = static_cast<int>(n) * q;
    int count = (k_eigs + per_point - 1) / per_point;
    points = solver_detail::initial_points(tau, radius, count, rng);
  }

  std::vector<EigPair> last_candidates;
  std::vector<double> last_residuals;
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    auto t_start = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iter = iter;
    rec.interp_points = points;
    for (Complex mu : points) expand_at(mu);

    // The initial middle block must be at least k_eigs x k_eigs.
    if (iter == 0) {
      int guard = 0;
      while (red.dim() < k_eigs && guard++ < 20) {
        Complex extra = tau + radius * rng.complex_normal();
        rec.interp_points.push_back(extra);
        expand_at(extra);
      }
      if (red.dim() < k_eigs)
        throw Error("solve_rep: could not build an initial subspace of size " +
                    std::to_string(k_eigs));
    }
    if (opts.debug_full_rebuild) red.rebuild();

    auto [acal_r, bcal_r] = red.pencil();
    std::vector<EigPair> filtered =
        reduced_eigs_filtered(acal_r, bcal_r, red.dim(), opts.filter_tol);
    if (filtered.empty()) throw Error("solve_rep: reduced spectrum empty");

    std::stable_sort(filtered.begin(), filtered.end(),
                     [&](const EigPair& a, const EigPair& b) {
                       return solver_detail::closer_to(a.lambda, b.lambda, tau);
                     });
    if (static_cast<int>(filtered.size()) > k_eigs) filtered.resize(k_eigs);

    rec.candidates.clear();
    last_residuals.clear();
    for (const auto& cand : filtered) {
      double res = residual_rational(sys, lin, cand.lambda, cand.v, red.v());
      rec.candidates.push_back({cand.lambda, res, false});
      last_residuals.push_back(res);
    }
    last_candidates = filtered;

    rec.subspace_dim = red.dim();
    rec.factorizations = counters::factorizations() - fact0;
    rec.solves = counters::block_solves() - solve0;
    rec.adjoint_solves = counters::adjoint_block_solves() - adj0;

    converged = static_cast<int>(filtered.size()) == k_eigs &&
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
        // all tracked candidates converged but fewer than k_eigs exist;
        // try to enrich the subspace near the target
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
    est.v_full = last_candidates[i].v.tail(n);  // Alg. 1 eigenvector estimate
    est.residual = last_residuals[i];
    est.converged = est.residual < opts.tol;
    report.eigenvalues.push_back(std::move(est));
  }
  return report;
}

}  // namespace nepspace
