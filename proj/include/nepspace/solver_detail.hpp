// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nepspace/report.hpp"
#include "nepspace/rng.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

/// Options shared by the rational and split-form subspace solvers.
struct SolveOptions {
  Mode mode = Mode::TwoSided;
  int q = 0;  ///< interpolation parameter; 0 picks 2 (two-sided) / 3 (one-sided)
  double tol = 1e-8;
  int max_iter = 30;
  std::vector<Complex> init_points;  ///< explicit initial interpolation points
  double init_radius = -1.0;         ///< scale of random offsets; <= 0 -> auto
  std::uint64_t seed = 0;
  Index partition = 2;     ///< partition parameter m (split solver only)
  double filter_tol = 1e-8;
  double drop_tol = 1e-10;
  bool debug_full_rebuild = false;  ///< recompute projected blocks from scratch
  bool use_embedded_norm = false;   ///< alternative residual normalization
  int contour_nodes = 64;           ///< reduced contour solver (split only)
  double contour_radius = -1.0;     ///< <= 0 -> auto

  int effective_q() const {
    if (q > 0) return q;
    return mode == Mode::TwoSided ? 2 : 3;
  }
};

namespace solver_detail {

inline void validate_common(int k_eigs, const SolveOptions& opts) {
  if (k_eigs < 1) throw Error("solver: k_eigs must be >= 1");
  if (!(opts.tol > 0)) throw Error("solver: tol must be > 0");
  if (opts.max_iter < 1) throw Error("solver: max_iter must be >= 1");
  int q = opts.effective_q();
  if (opts.mode == Mode::TwoSided && q < 2)
    throw Error("solver: two-sided mode requires q >= 2");
  if (opts.mode == Mode::OneSided && q < 3)
    throw Error("solver: one-sided mode requires q >= 3");
}

/// Ties on |lambda - tau| break lexicographically on (real, imag).
inline bool closer_to(Complex a, Complex b, Complex tau) {
  double da = std::abs(a - tau), db = std::abs(b - tau);
  if (da != db) return da < db;
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

inline double default_init_radius(Complex tau) {
  return 0.1 * std::max(1.0, std::abs(tau));
}

/// tau first, then seeded Gaussian offsets around it.
inline std::vector<Complex> initial_points(Complex tau, double radius,
                                           int count, Rng& rng) {
  std::vector<Complex> pts{tau};
  for (int i = 1; i < count; ++i) pts.push_back(tau + radius * rng.complex_normal());
  return pts;
}

/// Indices of the candidates to interpolate at next, per Section-4 strategy:
/// every unconverged one (ALL), or exactly the unconverged one with the
/// smallest (BR) / largest (WR) residual.
inline std::vector<std::size_t> select_interpolation(
    const std::vector<CandidateRecord>& candidates, Strategy strategy,
    double tol) {
  std::vector<std::size_t> unconverged;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!(candidates[i].residual < tol)) unconverged.push_back(i);
  if (unconverged.empty()) return {};
  switch (strategy) {
    case Strategy::All:
      return unconverged;
    case Strategy::BestResidual: {
      auto it = std::min_element(unconverged.begin(), unconverged.end(),
                                 [&](std::size_t a, std::size_t b) {
                                   return candidates[a].residual <
                                          candidates[b].residual;
                                 });
      return {*it};
    }
    case Strategy::WorstResidual: {
      auto it = std::max_element(unconverged.begin(), unconverged.end(),
                                 [&](std::size_t a, std::size_t b) {
                                   return candidates[a].residual <
                                          candidates[b].residual;
                                 });
      return {*it};
    }
  }
  return {};
}

/// Cache of direction blocks per interpolation point. Revisiting a point
/// within 1e-14 (relative) skips the factorization and reuses the block.
class ExpansionCache {
public:
  struct Entry {
    Complex point;
    DenseMat vdirs;
    DenseMat wdirs;
  };

  const Entry* find(Complex mu) const {
    for (const auto& e : entries_)
      if (std::abs(mu - e.point) <= 1e-14 * std::max(1.0, std::abs(e.point)))
        return &e;
    return nullptr;
  }

  const Entry& insert(Complex mu, DenseMat vdirs, DenseMat wdirs) {
    entries_.push_back({mu, std::move(vdirs), std::move(wdirs)});
    return entries_.back();
  }

private:
  std::vector<Entry> entries_;
};

}  // namespace solver_detail

}  // namespace nepspace
