// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "nepspace/nep.hpp"
#include "nepspace/rep.hpp"
#include "nepspace/rng.hpp"

namespace nepspace {

/// Proper rational problem with a random banded state matrix: A is k x k
/// with standard-normal entries inside the band, B and C are dense random.
/// Deterministic under the seed (fixed draw order: A by columns, then B,
/// then C).
inline StateSpaceRep generate_banded(Index k, Index bandwidth, Index n_io,
                                     std::uint64_t seed) {
  if (bandwidth < 1 || bandwidth % 2 == 0)
    throw Error("generate_banded: bandwidth must be odd and >= 1");
  if (n_io < 1) throw Error("generate_banded: n_io must be >= 1");
  if (k < 1) throw Error("generate_banded: k must be >= 1");
  const Index half = (bandwidth - 1) / 2;
  Rng rng(seed);
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(bandwidth * k);
  for (Index j = 0; j < k; ++j)
    for (Index i = std::max<Index>(0, j - half);
         i <= std::min<Index>(k - 1, j + half); ++i)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j),
                        Complex(rng.normal(), 0.0));
  SparseMat a(k, k);
  a.setFromTriplets(trip.begin(), trip.end());
  DenseMat b = rng.normal_matrix(k, n_io);
  DenseMat c = rng.normal_matrix(n_io, k);
  return StateSpaceRep({}, std::move(a), std::move(b), std::move(c));
}

namespace detail {

/// Random sparse symmetric matrix: unit-probability diagonal, off-diagonal
/// entries kept with the given density, all standard normal times scale.
inline SparseMat random_symmetric(Index n, double density, double scale,
                                  Rng& rng) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Index j = 0; j < n; ++j) {
    trip.emplace_back(static_cast<int>(j), static_cast<int>(j),
                      Complex(scale * rng.normal(), 0.0));
    for (Index i = j + 1; i < n; ++i) {
      if (rng.uniform() >= density) continue;
      Complex v(scale * rng.normal(), 0.0);
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
      trip.emplace_back(static_cast<int>(j), static_cast<int>(i), v);
    }
  }
  SparseMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

inline SparseMat random_sparse(Index n, double density, Rng& rng) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Index j = 0; j < n; ++j) {
    trip.emplace_back(static_cast<int>(j), static_cast<int>(j),
                      Complex(rng.normal(), 0.0));
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      if (rng.uniform() >= density) continue;
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j),
                        Complex(rng.normal(), 0.0));
    }
  }
  SparseMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace detail

/// Delay problem F - s I + e^{-2s} G with sparse symmetric random F and G,
/// the G entries scaled by g_scale (zero gives a plain linear pencil).
inline SplitNep generate_delay(Index n, double density, double g_scale,
                               std::uint64_t seed) {
  if (!(density > 0.0) || density > 1.0)
    throw Error("generate_delay: density must be in (0, 1]");
  if (n < 1) throw Error("generate_delay: n must be >= 1");
  Rng rng(seed);
  SparseMat f = detail::random_symmetric(n, density, 1.0, rng);
  SparseMat g = detail::random_symmetric(n, density, g_scale, rng);
  SparseMat minus_ident(n, n);
  minus_ident.setIdentity();
  minus_ident *= Complex(-1.0, 0.0);

  std::vector<SplitTerm> terms;
  terms.push_back({ScalarFn::constant(Complex(1, 0)), std::move(f)});
  terms.push_back({ScalarFn::monomial(1), std::move(minus_ident)});
  terms.push_back({ScalarFn::exponential(Complex(-2, 0)), std::move(g)});
  return SplitNep(std::move(terms));
}

/// Quadratic polynomial problem P_0 + s P_1 + s^2 P_2 with sparse random
/// coefficients (nonzero diagonals keep the leading coefficient regular).
inline SplitNep generate_quadratic(Index n, double density,
                                   std::uint64_t seed) {
  if (!(density > 0.0) || density > 1.0)
    throw Error("generate_quadratic: density must be in (0, 1]");
  if (n < 1) throw Error("generate_quadratic: n must be >= 1");
  Rng rng(seed);
  std::vector<SplitTerm> terms;
  for (int p = 0; p <= 2; ++p)
    terms.push_back(
        {ScalarFn::monomial(p), detail::random_sparse(n, density, rng)});
  return SplitNep(std::move(terms));
}

}  // namespace nepspace
