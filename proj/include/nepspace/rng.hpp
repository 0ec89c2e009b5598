// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "nepspace/types.hpp"

namespace nepspace {

/// Seeded random source shared by generators, initial-point selection and
/// contour probing. One engine per run keeps results reproducible.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  double uniform() { return uniform_(engine_); }

  Complex complex_normal() {
    double re = normal();
    double im = normal();
    return Complex(re, im);
  }

  DenseMat normal_matrix(Index rows, Index cols) {
    DenseMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = Complex(normal(), 0.0);
    return m;
  }

  DenseMat complex_normal_matrix(Index rows, Index cols) {
    DenseMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = complex_normal();
    return m;
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace nepspace
