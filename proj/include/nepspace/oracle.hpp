// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <functional>
#include <vector>

#include "nepspace/dense.hpp"
#include "nepspace/nep.hpp"
#include "nepspace/rep.hpp"
#include "nepspace/small_nep.hpp"
#include "nepspace/solver_detail.hpp"

namespace nepspace {

/// Dense ground truth for rational problems at desk scale: densify the full
/// linearization, solve the pencil, and drop spurious values that coincide
/// with eigenvalues of A. Returns the k_eigs values closest to tau.
inline std::vector<Complex> oracle_rep(const StateSpaceRep& sys, Complex tau,
                                       int k_eigs) {
  const Index total = sys.state_dim() + sys.io_dim() * sys.lin_degree();
  if (total > 2000)
    throw Error("oracle_rep: problem too large for the dense oracle (" +
                std::to_string(total) + " > 2000)");
  Linearization lin = build_linearization(sys);
  PencilEigs pe = pencil_eigs(DenseMat(lin.acal), DenseMat(lin.bcal));

  Eigen::ComplexEigenSolver<DenseMat> aeig(DenseMat(sys.a()),
                                           /*computeEigenvectors=*/false);
  if (aeig.info() != Eigen::Success)
    throw DecompositionError("oracle_rep: eigensolver on A failed",
                             sys.state_dim());
  const auto& poles = aeig.eigenvalues();

  std::vector<Complex> vals;
  for (Complex lambda : pe.values) {
    bool is_pole = false;
    for (Index i = 0; i < poles.size(); ++i)
      if (std::abs(lambda - poles(i)) <=
          1e-10 * std::max(1.0, std::abs(poles(i)))) {
        is_pole = true;
        break;
      }
    if (!is_pole) vals.push_back(lambda);
  }
  std::stable_sort(vals.begin(), vals.end(), [&](Complex a, Complex b) {
    return solver_detail::closer_to(a, b, tau);
  });
  if (static_cast<int>(vals.size()) > k_eigs) vals.resize(k_eigs);
  return vals;
}

/// Newton iteration on a holomorphic scalar function given with its
/// derivative; converges to |f| <= 1e-14 * scale or fails after 200 steps.
inline Complex oracle_scalar_root(
    const std::function<std::pair<Complex, Complex>(Complex)>& f_and_df,
    Complex guess) {
  Complex z = guess;
  auto [f0, df0] = f_and_df(guess);
  const double scale = std::max(1.0, std::abs(f0));
  for (int step = 0; step < 200; ++step) {
    auto [f, df] = f_and_df(z);
    if (std::abs(f) <= 1e-14 * scale) return z;
    if (std::abs(df) == 0.0)
      throw Error("oracle_scalar_root: zero derivative");
    z -= f / df;
  }
  throw Error("oracle_scalar_root: no convergence in 200 steps");
}

/// Dense ground truth for split problems: companion linearization for
/// polynomial problems, otherwise a fine contour sweep (256 nodes) over a
/// disk around tau.
inline std::vector<Complex> oracle_nep(const SplitNep& nep, Complex tau,
                                       int k_eigs, double region_radius,
                                       std::uint64_t seed = 0x9e3779b9) {
  if (nep.size() > 300)
    throw Error("oracle_nep: problem too large for the dense oracle (" +
                std::to_string(nep.size()) + " > 300)");
  std::vector<EigPair> pairs;
  bool polynomial = true;
  for (const auto& t : nep.terms())
    if (!t.fn.is_polynomial()) polynomial = false;

  if (polynomial) {
    int degree = 0;
    for (const auto& t : nep.terms())
      degree = std::max(degree, t.fn.poly_degree());
    std::vector<DenseMat> coeffs(
        degree + 1, DenseMat::Zero(nep.size(), nep.size()));
    for (const auto& t : nep.terms()) {
      Complex scale = t.fn.kind() == ScalarFn::Kind::Constant ? t.fn.param()
                                                              : Complex(1, 0);
      coeffs[t.fn.poly_degree()] += scale * DenseMat(t.t);
    }
    pairs = companion_eigs(coeffs, tau, 0);
  } else {
    Contour c;
    c.center = tau;
    c.radius = region_radius;
    c.nodes = 256;
    c.probe_cols = k_eigs + 8;
    Rng rng(seed);
    pairs = contour_eigs([&](Complex s) { return nep.eval_dense(s); }, c, 0,
                         tau, rng);
  }

  std::vector<Complex> vals;
  vals.reserve(pairs.size());
  for (const auto& p : pairs) vals.push_back(p.lambda);
  std::stable_sort(vals.begin(), vals.end(), [&](Complex a, Complex b) {
    return solver_detail::closer_to(a, b, tau);
  });
  if (static_cast<int>(vals.size()) > k_eigs) vals.resize(k_eigs);
  return vals;
}

}  // namespace nepspace
