// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nepspace/errors.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

namespace counters {

/// Process-wide tallies of the expensive sparse operations. Solvers report
/// deltas of these in their iteration logs.
inline std::atomic<std::uint64_t>& factorizations() {
  static std::atomic<std::uint64_t> n{0};
  return n;
}
inline std::atomic<std::uint64_t>& block_solves() {
  static std::atomic<std::uint64_t> n{0};
  return n;
}
inline std::atomic<std::uint64_t>& adjoint_block_solves() {
  static std::atomic<std::uint64_t> n{0};
  return n;
}

}  // namespace counters

/// Reusable sparse LU factorization of a square complex matrix. Factor data
/// is immutable after construction; concurrent solves are safe.
class Factorization {
public:
  explicit Factorization(const SparseMat& m, Complex shift = Complex(0, 0))
      : n_(m.rows()), shift_(shift) {
    if (m.rows() != m.cols())
      throw Error("factorize: matrix must be square");
    SparseMat compressed = m;
    compressed.makeCompressed();
    lu_ = std::make_shared<Solver>();
    lu_->compute(compressed);
    if (lu_->info() != Eigen::Success) {
      std::string detail = lu_->lastErrorMessage();
      throw SingularMatrixError("factorize: " + (detail.empty()
                                ? std::string("singular matrix") : detail), 0.0);
    }
    fill_ = lu_->nnzL() + lu_->nnzU();
    counters::factorizations().fetch_add(1, std::memory_order_relaxed);
  }

  Index size() const { return n_; }
  Complex shift() const { return shift_; }
  Index fill() const { return fill_; }

  /// X = M^{-1} RHS, or (M^H)^{-1} RHS when adjoint.
  DenseMat solve(const DenseMat& rhs, bool adjoint = false) const {
    if (rhs.rows() != n_) throw Error("solve_multi: row count mismatch");
    if (adjoint) {
      counters::adjoint_block_solves().fetch_add(1, std::memory_order_relaxed);
      return lu_->adjoint().solve(rhs);
    }
    counters::block_solves().fetch_add(1, std::memory_order_relaxed);
    return lu_->solve(rhs);
  }

private:
  // Eigen's adjoint()/transpose() views are not const-qualified, although
  // solving through them only reads factor data.
  using Solver = Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>>;
  std::shared_ptr<Solver> lu_;
  Index n_;
  Complex shift_;
  Index fill_ = 0;
};

inline Factorization factorize(const SparseMat& m,
                               Complex shift = Complex(0, 0)) {
  return Factorization(m, shift);
}

inline DenseMat solve_multi(const Factorization& f, const DenseMat& rhs,
                            bool adjoint = false) {
  return f.solve(rhs, adjoint);
}

/// A - mu*I as a sparse matrix.
inline SparseMat shifted_identity(const SparseMat& a, Complex mu) {
  SparseMat ident(a.rows(), a.cols());
  ident.setIdentity();
  SparseMat out = a - mu * ident;
  out.makeCompressed();
  return out;
}

// ---------------------------------------------------------------------------
// Matrix Market coordinate format, real and complex, with general/symmetric/
// hermitian symmetry expanded to explicit storage.
// ---------------------------------------------------------------------------

namespace detail {

inline bool next_data_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = line.find_first_not_of(" \t\r\n");
    if (pos == std::string::npos) continue;  // blank
    if (line[pos] == '%') continue;          // comment
    return true;
  }
  return false;
}

}  // namespace detail

inline SparseMat read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file: " + path);
  long lineno = 0;

  std::string banner;
  if (!std::getline(in, banner)) throw ParseError(path, 1, "empty file");
  ++lineno;
  std::istringstream hs(banner);
  std::string head, object, format, field, symmetry;
  hs >> head >> object >> format >> field >> symmetry;
  if (head != "%%MatrixMarket" || object != "matrix")
    throw ParseError(path, lineno, "not a Matrix Market header: " + banner);
  if (format != "coordinate")
    throw ParseError(path, lineno, "only coordinate format is supported");
  bool complex_field;
  if (field == "real")
    complex_field = false;
  else if (field == "complex")
    complex_field = true;
  else
    throw ParseError(path, lineno, "unsupported field type: " + field);
  enum class Sym { General, Symmetric, Hermitian } sym;
  if (symmetry == "general")
    sym = Sym::General;
  else if (symmetry == "symmetric")
    sym = Sym::Symmetric;
  else if (symmetry == "hermitian")
    sym = Sym::Hermitian;
  else
    throw ParseError(path, lineno, "unsupported symmetry: " + symmetry);

  std::string line;
  if (!detail::next_data_line(in, line, lineno))
    throw ParseError(path, lineno, "missing size line");
  long rows, cols, nnz;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw ParseError(path, lineno, "malformed size line: " + line);
  }
  if (sym != Sym::General && rows != cols)
    throw ParseError(path, lineno, "symmetric matrix must be square");

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(sym == Sym::General ? nnz : 2 * nnz);
  std::set<std::pair<long, long>> seen;
  for (long e = 0; e < nnz; ++e) {
    if (!detail::next_data_line(in, line, lineno))
      throw ParseError(path, lineno, "unexpected end of file; expected " +
                                         std::to_string(nnz) + " entries");
    std::istringstream ss(line);
    long i, j;
    double re, im = 0.0;
    if (!(ss >> i >> j >> re) || (complex_field && !(ss >> im)))
      throw ParseError(path, lineno, "malformed entry: " + line);
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw ParseError(path, lineno, "index out of bounds: " + line);
    if (sym != Sym::General && j > i)
      throw ParseError(path, lineno,
                       "entry above the diagonal in a symmetric file");
    if (!seen.insert({i, j}).second)
      throw ParseError(path, lineno, "duplicate entry: " + line);
    Complex v(re, im);
    trip.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (sym != Sym::General && i != j)
      trip.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1),
                        sym == Sym::Hermitian ? std::conj(v) : v);
  }

  SparseMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

/// Writes a sparse matrix in coordinate format; picks the real field when all
/// imaginary parts vanish.
inline void write_matrix_market(const std::string& path, const SparseMat& m) {
  bool complex_field = false;
  for (int j = 0; j < m.outerSize() && !complex_field; ++j)
    for (SparseMat::InnerIterator it(m, j); it; ++it)
      if (it.value().imag() != 0.0) {
        complex_field = true;
        break;
      }
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << "%%MatrixMarket matrix coordinate "
      << (complex_field ? "complex" : "real") << " general\n";
  out.precision(17);
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int j = 0; j < m.outerSize(); ++j)
    for (SparseMat::InnerIterator it(m, j); it; ++it) {
      out << (it.row() + 1) << " " << (it.col() + 1) << " "
          << it.value().real();
      if (complex_field) out << " " << it.value().imag();
      out << "\n";
    }
}

inline void write_matrix_market(const std::string& path, const DenseMat& m) {
  write_matrix_market(path, SparseMat(m.sparseView()));
}

inline DenseMat to_dense(const SparseMat& m) { return DenseMat(m); }

}  // namespace nepspace
