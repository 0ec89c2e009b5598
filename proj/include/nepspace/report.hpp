// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "nepspace/errors.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

/// Interpolation-point selection among the k closest reduced eigenvalues.
enum class Strategy { All, BestResidual, WorstResidual };

enum class Mode { TwoSided, OneSided };

inline Strategy parse_strategy(const std::string& s) {
  if (s == "ALL") return Strategy::All;
  if (s == "BR") return Strategy::BestResidual;
  if (s == "WR") return Strategy::WorstResidual;
  throw Error("unknown strategy: " + s + " (expected ALL, BR or WR)");
}

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::All: return "ALL";
    case Strategy::BestResidual: return "BR";
    case Strategy::WorstResidual: return "WR";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "two-sided") return Mode::TwoSided;
  if (s == "one-sided") return Mode::OneSided;
  throw Error("unknown mode: " + s + " (expected two-sided or one-sided)");
}

inline std::string to_string(Mode m) {
  return m == Mode::TwoSided ? "two-sided" : "one-sided";
}

/// Final approximation of one eigenpair.
struct EigEstimate {
  Complex lambda;
  DenseVec v_reduced;  // eigenvector of the reduced problem
  DenseVec v_full;     // eigenvector estimate of the original n x n problem
  double residual = 0.0;
  bool converged = false;
};

struct CandidateRecord {
  Complex lambda;
  double residual = 0.0;
  bool interpolated_next = false;  // chosen as interpolation point afterwards
};

struct IterationRecord {
  int iter = 0;
  std::vector<Complex> interp_points;  // points expanded at this iteration
  std::vector<CandidateRecord> candidates;
  Index subspace_dim = 0;
  std::uint64_t factorizations = 0;  // cumulative within the run
  std::uint64_t solves = 0;
  std::uint64_t adjoint_solves = 0;
  double elapsed_s = 0.0;
};

struct SolveReport {
  std::vector<IterationRecord> iterations;
  std::vector<EigEstimate> eigenvalues;  // sorted by |lambda - tau|
  bool converged = false;
  int iterations_used = 0;
  std::uint64_t total_factorizations = 0;
  std::uint64_t total_solves = 0;
  std::uint64_t total_adjoint_solves = 0;
  DenseMat final_v;  // right projection basis at termination
  DenseMat final_w;  // left basis (same matrix as final_v in one-sided mode)
  std::vector<std::string> notes;
};

/// One row per candidate per iteration. The trailing `interp` column marks
/// candidates selected as interpolation points for the following iteration.
inline void write_iterations_csv(const SolveReport& report, std::ostream& out) {
  out << "iter,candidate,lambda_re,lambda_im,residual,subdim,nfact,elapsed_s,"
         "interp\n";
  out << std::setprecision(17);
  for (const auto& rec : report.iterations) {
    int cand = 0;
    for (const auto& c : rec.candidates) {
      out << rec.iter << ',' << cand++ << ',' << c.lambda.real() << ','
          << c.lambda.imag() << ',' << c.residual << ',' << rec.subspace_dim
          << ',' << rec.factorizations << ',' << rec.elapsed_s << ','
          << (c.interpolated_next ? 1 : 0) << '\n';
    }
  }
}

}  // namespace nepspace
