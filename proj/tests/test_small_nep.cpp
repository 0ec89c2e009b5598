// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "nepspace/oracle.hpp"
#include "nepspace/rng.hpp"
#include "nepspace/small_nep.hpp"

using namespace nepspace;

namespace {

std::vector<DenseMat> scalar_poly(std::initializer_list<double> coeffs) {
  std::vector<DenseMat> out;
  for (double c : coeffs) {
    DenseMat m(1, 1);
    m(0, 0) = c;
    out.push_back(m);
  }
  return out;
}

Complex delay_fn(Complex s) { return -s + 0.3 + 0.1 * std::exp(-2.0 * s); }
Complex delay_dfn(Complex s) { return -1.0 - 0.2 * std::exp(-2.0 * s); }

}  // namespace

TEST_CASE("companion_eigs on scalar quadratics", "[small-nep]") {
  auto pairs = companion_eigs(scalar_poly({-1.0, 0.0, 1.0}), Complex(0.9, 0));
  REQUIRE(pairs.size() == 2);
  CHECK(std::abs(pairs[0].lambda - Complex(1, 0)) <= 1e-13);
  CHECK(std::abs(pairs[1].lambda - Complex(-1, 0)) <= 1e-13);
}

TEST_CASE("companion_eigs on a linear pencil", "[small-nep]") {
  DenseMat a = DenseMat::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  // P(s) = s I - A
  std::vector<DenseMat> coeffs{-a, DenseMat::Identity(2, 2)};
  auto pairs = companion_eigs(coeffs, Complex(0, 0));
  REQUIRE(pairs.size() == 2);
  CHECK(std::abs(pairs[0].lambda - Complex(1, 0)) <= 1e-13);
  CHECK(std::abs(pairs[1].lambda - Complex(2, 0)) <= 1e-13);
  // eigenvectors are the unit vectors
  CHECK(std::abs(std::abs(pairs[0].v(0)) - 1.0) <= 1e-12);
  CHECK(std::abs(pairs[0].v(1)) <= 1e-12);
}

TEST_CASE("companion_eigs residuals on a random quadratic", "[small-nep]") {
  Rng rng(5);
  std::vector<DenseMat> coeffs{rng.complex_normal_matrix(3, 3),
                               rng.complex_normal_matrix(3, 3),
                               rng.complex_normal_matrix(3, 3)};
  auto pairs = companion_eigs(coeffs, Complex(0, 0));
  REQUIRE(pairs.size() == 6);
  for (const auto& p : pairs) {
    DenseMat pl = coeffs[0] + p.lambda * coeffs[1] +
                  p.lambda * p.lambda * coeffs[2];
    CHECK(smallest_singular_value(pl) <= 1e-8 * inf_norm(pl));
    CHECK((pl * p.v).lpNorm<Eigen::Infinity>() <= 1e-8 * inf_norm(pl));
  }
}

TEST_CASE("companion_eigs rejects a zero leading coefficient", "[small-nep]") {
  CHECK_THROWS_AS(companion_eigs(scalar_poly({1.0, 0.0}), Complex(0, 0)),
                  Error);
  CHECK_THROWS_AS(companion_eigs(scalar_poly({1.0}), Complex(0, 0)), Error);
}

TEST_CASE("contour_eigs isolates one root of s^2 - 1", "[small-nep]") {
  Rng rng(77);
  auto eval = [](Complex s) {
    DenseMat m(1, 1);
    m(0, 0) = s * s - 1.0;
    return m;
  };
  Contour c{Complex(0.9, 0), 0.5, 64, 4};
  auto pairs = contour_eigs(eval, c, 0, c.center, rng);
  REQUIRE(pairs.size() == 1);
  CHECK(std::abs(pairs[0].lambda - Complex(1, 0)) <= 1e-11);
}

TEST_CASE("contour_eigs on the scalar delay function", "[small-nep]") {
  Rng rng(78);
  auto eval = [](Complex s) {
    DenseMat m(1, 1);
    m(0, 0) = delay_fn(s);
    return m;
  };
  Complex root = oracle_scalar_root(
      [](Complex s) { return std::make_pair(delay_fn(s), delay_dfn(s)); },
      Complex(0.3, 0));
  Contour c{Complex(0.3, 0), 0.5, 64, 4};
  auto pairs = contour_eigs(eval, c, 0, c.center, rng);
  REQUIRE(pairs.size() == 1);
  CHECK(std::abs(pairs[0].lambda - root) <= 1e-10);
}

TEST_CASE("contour_eigs recovers enclosed pencil eigenvalues", "[small-nep]") {
  Rng rng(79);
  // diagonal pencil with eigenvalues 0.1, 0.3, 0.5, 2, 3
  DenseVec diag(5);
  diag << 0.1, 0.3, 0.5, 2.0, 3.0;
  auto eval = [&](Complex s) {
    DenseMat m = DenseMat::Zero(5, 5);
    for (Index i = 0; i < 5; ++i) m(i, i) = diag(i) - s;
    return m;
  };
  Contour c{Complex(0.3, 0), 0.45, 64, 7};
  auto pairs = contour_eigs(eval, c, 0, c.center, rng);
  REQUIRE(pairs.size() == 3);
  std::vector<double> got;
  for (const auto& p : pairs) got.push_back(p.lambda.real());
  std::sort(got.begin(), got.end());
  CHECK(std::abs(got[0] - 0.1) <= 1e-10);
  CHECK(std::abs(got[1] - 0.3) <= 1e-10);
  CHECK(std::abs(got[2] - 0.5) <= 1e-10);
}

TEST_CASE("contour_eigs accepted pairs pass the residual gate", "[small-nep]") {
  Rng rng(80);
  DenseMat f = rng.complex_normal_matrix(6, 6);
  auto eval = [&](Complex s) {
    return (f - s * DenseMat::Identity(6, 6)).eval();
  };
  Contour c{Complex(0, 0), 2.0, 64, 8};
  auto pairs = contour_eigs(eval, c, 0, c.center, rng);
  for (const auto& p : pairs) {
    DenseMat tl = eval(p.lambda);
    CHECK((tl * p.v).lpNorm<Eigen::Infinity>() <=
          1e-8 * inf_norm(tl) * p.v.lpNorm<Eigen::Infinity>());
    CHECK(std::abs(p.lambda - c.center) <= c.radius + 1e-12);
  }
}

TEST_CASE("quadrature converges when doubling nodes", "[small-nep]") {
  auto eval = [](Complex s) {
    DenseMat m(1, 1);
    m(0, 0) = delay_fn(s);
    return m;
  };
  Complex prev;
  bool have_prev = false;
  for (int nodes : {32, 64, 128}) {
    Rng rng(81);  // same probe draw for comparability
    Contour c{Complex(0.3, 0), 0.5, nodes, 4};
    auto pairs = contour_eigs(eval, c, 0, c.center, rng);
    REQUIRE(pairs.size() == 1);
    if (have_prev) CHECK(std::abs(pairs[0].lambda - prev) <= 1e-10);
    prev = pairs[0].lambda;
    have_prev = true;
  }
}

TEST_CASE("contour_eigs reports saturation it cannot resolve", "[small-nep]") {
  Rng rng(82);
  // scalar function with two roots inside the disk: both Hankel passes stay
  // full-rank, so the solver must ask for a different setup rather than
  // return a silently incomplete set
  auto eval = [](Complex s) {
    DenseMat m(1, 1);
    m(0, 0) = (s - 0.2) * (s + 0.2);
    return m;
  };
  Contour c{Complex(0, 0), 1.0, 64, 4};
  CHECK_THROWS_AS(contour_eigs(eval, c, 0, c.center, rng), ContourRankError);
}

TEST_CASE("contour_eigs validates its contour", "[small-nep]") {
  auto eval = [](Complex s) {
    DenseMat m(1, 1);
    m(0, 0) = s;
    return m;
  };
  Rng rng(83);
  CHECK_THROWS_AS(
      contour_eigs(eval, Contour{Complex(0, 0), 1.0, 15, 4}, 0, 0.0, rng),
      Error);
  CHECK_THROWS_AS(
      contour_eigs(eval, Contour{Complex(0, 0), -1.0, 64, 4}, 0, 0.0, rng),
      Error);
}
