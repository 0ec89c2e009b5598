// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "nepspace/generators.hpp"
#include "nepspace/oracle.hpp"
#include "nepspace/rep_solver.hpp"
#include "nepspace/rng.hpp"

using namespace nepspace;

namespace {

SparseMat sparse_diag(std::initializer_list<double> values) {
  SparseMat m(static_cast<Index>(values.size()),
              static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) m.insert(i, i) = Complex(v, 0.0), ++i;
  m.makeCompressed();
  return m;
}

DenseMat scalar(double v) {
  DenseMat m(1, 1);
  m(0, 0) = v;
  return m;
}

/// A = diag(1,3), B = [1;1], C = [1 1], P0 = 0: single zero at s = 2.
StateSpaceRep worked_system() {
  DenseMat b(2, 1), c(1, 2);
  b << 1.0, 1.0;
  c << 1.0, 1.0;
  return StateSpaceRep({scalar(0.0)}, sparse_diag({1.0, 3.0}), b, c);
}

StateSpaceRep random_rep(Rng& rng, Index k, Index n, Index poly_degree) {
  StateSpaceRep base = generate_banded(k, 5, n, rng.engine()());
  if (poly_degree < 0) return base;
  std::vector<DenseMat> poly;
  for (Index j = 0; j <= poly_degree; ++j)
    poly.push_back(rng.complex_normal_matrix(n, n));
  return StateSpaceRep(poly, base.a(), base.b(), base.c());
}

/// Reduced transfer function P(s) + CV (s W*V - W*AV)^{-1} W*B evaluated
/// through the projected blocks.
DenseMat eval_reduced(const StateSpaceRep& sys, const ReducedRep& red,
                      Complex s) {
  DenseMat m = s * red.wv() - red.wav();
  DenseMat out = sys.poly().empty()
                     ? DenseMat::Zero(sys.io_dim(), sys.io_dim()).eval()
                     : sys.poly_eval(s);
  out += red.cv() * dense_solve(m, red.wb());
  return out;
}

ReducedRep expand_basis_at(const StateSpaceRep& sys, ReducedRep&& red,
                           Complex mu, int q) {
  auto [vdirs, wdirs] = expand_two_sided(sys, mu, q);
  DenseMat grown_v = orthonormal_extend(red.v(), vdirs);
  DenseMat add_v = grown_v.rightCols(grown_v.cols() - red.v().cols());
  DenseMat grown_w = orthonormal_extend(red.w(), wdirs);
  DenseMat add_w = grown_w.rightCols(grown_w.cols() - red.w().cols());
  red.extend(add_v, add_w);
  return std::move(red);
}

}  // namespace

TEST_CASE("expand_two_sided diagonal power chain", "[rep-solver]") {
  DenseMat b(2, 1), c(1, 2);
  b << 1.0, 1.0;
  c << 1.0, 1.0;
  StateSpaceRep sys({}, sparse_diag({1.0, 3.0}), b, c);
  auto [vdirs, wdirs] = expand_two_sided(sys, Complex(0, 0), 2);
  REQUIRE(vdirs.cols() == 2);
  CHECK(std::abs(vdirs(0, 0) - Complex(1, 0)) <= 1e-15);
  CHECK(std::abs(vdirs(1, 0) - Complex(1.0 / 3.0, 0)) <= 1e-15);
  CHECK(std::abs(vdirs(0, 1) - Complex(1, 0)) <= 1e-15);
  CHECK(std::abs(vdirs(1, 1) - Complex(1.0 / 9.0, 0)) <= 1e-15);
  // A Hermitian and C = B^H: the adjoint chain coincides with the right one
  CHECK(max_abs(wdirs - vdirs) <= 1e-15);
}

TEST_CASE("expand_one_sided produces the q-term chain", "[rep-solver]") {
  DenseMat b(2, 1), c(1, 2);
  b << 1.0, 1.0;
  c << 1.0, 1.0;
  StateSpaceRep sys({}, sparse_diag({1.0, 3.0}), b, c);
  DenseMat vdirs = expand_one_sided(sys, Complex(0, 0), 3);
  REQUIRE(vdirs.cols() == 3);
  CHECK(std::abs(vdirs(1, 2) - Complex(1.0 / 27.0, 0)) <= 1e-15);
  CHECK_THROWS_AS(expand_one_sided(sys, Complex(0, 0), 2), Error);
  CHECK_THROWS_AS(expand_two_sided(sys, Complex(1, 0), 2), PoleError);
}

TEST_CASE("expansion costs one factorization", "[rep-solver]") {
  Rng rng(61);
  StateSpaceRep sys = random_rep(rng, 60, 2, -1);
  auto f0 = counters::factorizations().load();
  auto s0 = counters::block_solves().load();
  auto a0 = counters::adjoint_block_solves().load();
  expand_two_sided(sys, Complex(0.4, 0.2), 2);
  CHECK(counters::factorizations().load() - f0 == 1);
  CHECK(counters::block_solves().load() - s0 == 2);
  CHECK(counters::adjoint_block_solves().load() - a0 == 2);
}

TEST_CASE("build_reduced_pencil with the identity projection", "[rep-solver]") {
  StateSpaceRep sys = worked_system();
  Linearization lin = build_linearization(sys);
  ProjectionPair proj{DenseMat::Identity(2, 2), DenseMat::Identity(2, 2),
                      Mode::TwoSided};
  auto [acal_r, bcal_r] = build_reduced_pencil(sys, proj);
  CHECK(max_abs(acal_r - DenseMat(lin.acal)) <= 1e-15);
  CHECK(max_abs(bcal_r - DenseMat(lin.bcal)) <= 1e-15);
}

TEST_CASE("reduced pencil reproduces the zero from a full-span chain",
          "[rep-solver]") {
  StateSpaceRep sys = worked_system();
  ReducedRep red(sys);
  red = expand_basis_at(sys, std::move(red), Complex(0, 0), 2);
  REQUIRE(red.dim() == 2);  // (A)^{-1}B, (A)^{-2}B span C^2
  auto [acal_r, bcal_r] = red.pencil();
  auto pairs = reduced_eigs_filtered(acal_r, bcal_r, red.dim());
  REQUIRE(pairs.size() == 1);
  CHECK(std::abs(pairs[0].lambda - Complex(2, 0)) <= 1e-12);
}

TEST_CASE("pole filter removes coinciding reduced eigenvalues", "[rep-solver]") {
  // R(s) = 1/(s-2) with a spurious pencil eigenvalue at 1 = eig(A)
  DenseMat b(2, 1), c(1, 2);
  b << 0.0, 1.0;
  c << 1.0, 1.0;
  StateSpaceRep sys({}, sparse_diag({1.0, 2.0}), b, c);
  Linearization lin = build_linearization(sys);
  DenseMat acal(lin.acal), bcal(lin.bcal);
  PencilEigs unfiltered = pencil_eigs(acal, bcal);
  REQUIRE(unfiltered.values.size() == 1);
  CHECK(std::abs(unfiltered.values[0] - Complex(1, 0)) <= 1e-12);
  // with V = W = I the reduced pencil equals the full one; the filter must
  // drop the candidate because W*AV - 1*W*V = A - I is singular
  auto kept = reduced_eigs_filtered(acal, bcal, 2);
  CHECK(kept.empty());
}

TEST_CASE("pole filter keeps regular candidates", "[rep-solver]") {
  StateSpaceRep sys = worked_system();
  Linearization lin = build_linearization(sys);
  auto kept =
      reduced_eigs_filtered(DenseMat(lin.acal), DenseMat(lin.bcal), 2);
  REQUIRE(kept.size() == 1);
  CHECK(std::abs(kept[0].lambda - Complex(2, 0)) <= 1e-12);
}

TEST_CASE("Hermite interpolation of the reduced transfer function",
          "[rep-solver]") {
  Rng rng(67);
  for (int inst = 0; inst < 5; ++inst) {
    Index k = 20 + static_cast<Index>(rng.uniform() * 80);
    Index n = 1 + static_cast<Index>(rng.uniform() * 2.99);
    Index degree = inst % 2 == 0 ? -1 : inst % 4;  // mix proper / polynomial
    StateSpaceRep sys = random_rep(rng, k, n, degree);

    ReducedRep red(sys);
    Complex tau = rng.complex_normal();
    red = expand_basis_at(sys, std::move(red), tau, 2);
    Complex mu = rng.complex_normal();
    red = expand_basis_at(sys, std::move(red), mu, 2);

    for (Complex point : {tau, mu}) {
      DenseMat full = eval_r(sys, point);
      DenseMat reduced = eval_reduced(sys, red, point);
      CHECK(max_abs(full - reduced) <= 1e-9 * std::max(1.0, max_abs(full)));

      // sigma_min values interpolate as well
      double sf = smallest_singular_value(full);
      double sr = smallest_singular_value(reduced);
      CHECK(std::abs(sf - sr) <= 1e-9 * std::max(1.0, sf));

      // derivatives 1..3 in closed form on both sides
      DenseMat e = red.wv();
      DenseMat m = point * e - red.wav();
      DenseMat x = dense_solve(m, red.wb());
      double factor = 1.0;
      for (int order = 1; order <= 3; ++order) {
        factor *= -order;
        x = dense_solve(m, (e * x).eval());
        DenseMat reduced_deriv = factor * (red.cv() * x);
        if (!sys.poly().empty()) reduced_deriv += sys.poly_eval(point, order);
        DenseMat full_deriv = eval_r_derivative(sys, point, order);
        CHECK(max_abs(full_deriv - reduced_deriv) <=
              1e-7 * std::max(1.0, max_abs(full_deriv)));
      }
    }
  }
}

TEST_CASE("closed-form derivatives confirm the Hermite conditions",
          "[rep-solver]") {
  Rng rng(68);
  StateSpaceRep sys = random_rep(rng, 60, 2, -1);
  ReducedRep red(sys);
  Complex mu(0.37, -0.21);
  red = expand_basis_at(sys, std::move(red), mu, 2);

  // reduced derivatives in closed form through the projected blocks
  DenseMat e = red.wv();
  DenseMat m = mu * e - red.wav();
  DenseMat x = dense_solve(m, red.wb());
  double factor = 1.0;
  for (int order = 1; order <= 3; ++order) {
    factor *= -order;
    x = dense_solve(m, (e * x).eval());
    DenseMat reduced_deriv = factor * (red.cv() * x);
    DenseMat full_deriv = eval_r_derivative(sys, mu, order);
    CHECK(max_abs(full_deriv - reduced_deriv) <=
          1e-7 * std::max(1.0, max_abs(full_deriv)));
  }
}

TEST_CASE("one-sided expansion interpolates two derivatives", "[rep-solver]") {
  Rng rng(69);
  StateSpaceRep sys = random_rep(rng, 50, 2, -1);
  ReducedRep red(sys);
  Complex mu(0.11, 0.43);
  DenseMat vdirs = expand_one_sided(sys, mu, 3);
  DenseMat v = orthonormal_extend(DenseMat(sys.state_dim(), 0), vdirs);
  red.extend(v, v);

  CHECK(max_abs(eval_r(sys, mu) - eval_reduced(sys, red, mu)) <=
        1e-9 * std::max(1.0, max_abs(eval_r(sys, mu))));
  // derivatives up to q-1 = 2 interpolate; the third does not in general
  DenseMat e = red.wv();
  DenseMat m = mu * e - red.wav();
  DenseMat x = dense_solve(m, red.wb());
  double factor = 1.0;
  for (int order = 1; order <= 2; ++order) {
    factor *= -order;
    x = dense_solve(m, (e * x).eval());
    DenseMat reduced_deriv = factor * (red.cv() * x);
    DenseMat full_deriv = eval_r_derivative(sys, mu, order);
    CHECK(max_abs(full_deriv - reduced_deriv) <=
          1e-7 * std::max(1.0, max_abs(full_deriv)));
  }
}

TEST_CASE("solve_rep finds the worked zero", "[rep-solver]") {
  StateSpaceRep sys = worked_system();
  SolveOptions opts;
  opts.tol = 1e-10;
  opts.seed = 5;
  SolveReport report = solve_rep(sys, Complex(2.5, 0), 1, Strategy::All, opts);
  REQUIRE(report.converged);
  CHECK(report.iterations_used <= 3);
  REQUIRE(report.eigenvalues.size() == 1);
  CHECK(std::abs(report.eigenvalues[0].lambda - Complex(2, 0)) <= 1e-10);
  CHECK(report.eigenvalues[0].converged);
  // full-space start: the subspace spans C^2 after the first expansion
  CHECK(report.iterations_used == 1);
}

TEST_CASE("solve_rep reuses directions for duplicated points", "[rep-solver]") {
  StateSpaceRep sys = worked_system();
  SolveOptions opts;
  opts.tol = 1e-10;
  opts.init_points = {Complex(2.5, 0), Complex(2.5, 0),
                      Complex(2.5 * (1.0 + 5e-15), 0)};
  SolveReport report = solve_rep(sys, Complex(2.5, 0), 1, Strategy::All, opts);
  REQUIRE(report.converged);
  CHECK(report.total_factorizations == 1);
}

TEST_CASE("solve_rep monotone growth and converged residuals stay below tol",
          "[rep-solver]") {
  StateSpaceRep sys = generate_banded(200, 5, 2, 902);
  SolveOptions opts;
  opts.tol = 1e-9;
  opts.seed = 12;
  opts.max_iter = 40;
  SolveReport report =
      solve_rep(sys, Complex(-0.5, 0.4), 3, Strategy::BestResidual, opts);
  REQUIRE(report.converged);
  for (std::size_t i = 1; i < report.iterations.size(); ++i) {
    CHECK(report.iterations[i].subspace_dim >=
          report.iterations[i - 1].subspace_dim);
    // once converged, candidates stay converged
    for (const auto& prev : report.iterations[i - 1].candidates) {
      if (!(prev.residual < opts.tol)) continue;
      double best_dist = 1e300;
      double best_res = 1.0;
      for (const auto& cur : report.iterations[i].candidates) {
        double dist = std::abs(cur.lambda - prev.lambda);
        if (dist < best_dist) {
          best_dist = dist;
          best_res = cur.residual;
        }
      }
      if (best_dist <= 1e-8) CHECK(best_res < opts.tol);
    }
  }
}

TEST_CASE("strategies mark interpolation points as specified", "[rep-solver]") {
  StateSpaceRep sys = generate_banded(150, 5, 2, 311);
  for (Strategy strategy :
       {Strategy::All, Strategy::BestResidual, Strategy::WorstResidual}) {
    SolveOptions opts;
    opts.tol = 1e-9;
    opts.seed = 4;
    opts.max_iter = 40;
    SolveReport report = solve_rep(sys, Complex(0.3, 0.3), 3, strategy, opts);
    REQUIRE(report.converged);
    for (std::size_t i = 0; i + 1 < report.iterations.size(); ++i) {
      const auto& rec = report.iterations[i];
      std::size_t marked = 0;
      for (const auto& c : rec.candidates) {
        if (c.interpolated_next) {
          ++marked;
          if (strategy == Strategy::All) CHECK(!(c.residual < opts.tol));
        }
      }
      if (strategy == Strategy::All) {
        std::size_t unconverged = 0;
        for (const auto& c : rec.candidates)
          if (!(c.residual < opts.tol)) ++unconverged;
        CHECK(marked == unconverged);
      } else {
        CHECK(marked == 1);
      }
      // the marked candidates are exactly the next iteration's points
      std::vector<Complex> expected;
      for (const auto& c : rec.candidates)
        if (c.interpolated_next) expected.push_back(c.lambda);
      REQUIRE(report.iterations[i + 1].interp_points.size() ==
              expected.size());
      for (std::size_t j = 0; j < expected.size(); ++j)
        CHECK(std::abs(report.iterations[i + 1].interp_points[j] -
                       expected[j]) == 0.0);
    }
  }
}

TEST_CASE("solve_rep incremental blocks match the full rebuild",
          "[rep-solver]") {
  StateSpaceRep sys = generate_banded(120, 5, 2, 808);
  SolveOptions incremental;
  incremental.tol = 1e-9;
  incremental.seed = 21;
  SolveOptions rebuilt = incremental;
  rebuilt.debug_full_rebuild = true;
  SolveReport a =
      solve_rep(sys, Complex(0.2, 0.1), 2, Strategy::All, incremental);
  SolveReport b = solve_rep(sys, Complex(0.2, 0.1), 2, Strategy::All, rebuilt);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
  for (std::size_t i = 0; i < a.eigenvalues.size(); ++i)
    CHECK(std::abs(a.eigenvalues[i].lambda - b.eigenvalues[i].lambda) <=
          1e-12);
}

TEST_CASE("solve_rep validates its options", "[rep-solver]") {
  StateSpaceRep sys = worked_system();
  SolveOptions opts;
  opts.tol = -1.0;
  CHECK_THROWS_AS(solve_rep(sys, Complex(0, 0), 1, Strategy::All, opts),
                  Error);
  SolveOptions bad_q;
  bad_q.mode = Mode::OneSided;
  bad_q.q = 2;
  CHECK_THROWS_AS(solve_rep(sys, Complex(0, 0), 1, Strategy::All, bad_q),
                  Error);
  SolveOptions ok;
  CHECK_THROWS_AS(solve_rep(sys, Complex(0, 0), 0, Strategy::All, ok), Error);
}
