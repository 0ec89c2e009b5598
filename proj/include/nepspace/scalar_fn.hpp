// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nepspace/errors.hpp"
#include "nepspace/types.hpp"

namespace nepspace {

namespace detail {

/// [p(s), p'(s), ..., p^{(up_to)}(s)] for a polynomial with coefficients
/// lowest degree first, by Horner per derivative order.
inline std::vector<Complex> poly_derivs(const DenseVec& coeffs, Complex s,
                                        int up_to) {
  std::vector<Complex> out(up_to + 1, Complex(0, 0));
  const Index deg = coeffs.size() - 1;
  for (int j = 0; j <= up_to; ++j) {
    Complex acc(0, 0);
    for (Index p = deg; p >= j; --p) {
      double fall = 1.0;
      for (int t = 0; t < j; ++t) fall *= double(p - t);
      acc = acc * s + fall * coeffs(p);
    }
    out[j] = acc;
  }
  return out;
}

inline std::vector<std::vector<double>> binomials(int n) {
  std::vector<std::vector<double>> b(n + 1);
  for (int i = 0; i <= n; ++i) {
    b[i].assign(i + 1, 1.0);
    for (int j = 1; j < i; ++j) b[i][j] = b[i - 1][j - 1] + b[i - 1][j];
  }
  return b;
}

inline Complex int_pow(Complex z, Index p) {
  Complex out(1, 0);
  for (Index i = 0; i < p; ++i) out *= z;
  return out;
}

}  // namespace detail

/// Scalar coefficient function of a split-form problem, with closed-form
/// derivatives of every order.
class ScalarFn {
public:
  enum class Kind { Monomial, Exponential, SqrtBranch, Rational, Constant };

  static ScalarFn monomial(int power) {
    if (power < 0) throw Error("ScalarFn: monomial power must be >= 0");
    ScalarFn f;
    f.kind_ = Kind::Monomial;
    f.power_ = power;
    return f;
  }

  /// e^{alpha s}
  static ScalarFn exponential(Complex alpha) {
    ScalarFn f;
    f.kind_ = Kind::Exponential;
    f.param_ = alpha;
    return f;
  }

  /// i sqrt(s - sigma^2), principal branch.
  static ScalarFn sqrt_branch(Complex sigma) {
    ScalarFn f;
    f.kind_ = Kind::SqrtBranch;
    f.param_ = sigma;
    return f;
  }

  /// p(s)/d(s), d monic, coefficients lowest degree first.
  static ScalarFn rational(DenseVec num, DenseVec den) {
    if (den.size() < 1) throw Error("ScalarFn: empty denominator");
    if (std::abs(den(den.size() - 1) - Complex(1, 0)) > 1e-12)
      throw Error("ScalarFn: denominator must be monic");
    if (num.size() < 1) num = DenseVec::Zero(1);
    ScalarFn f;
    f.kind_ = Kind::Rational;
    f.num_ = std::move(num);
    f.den_ = std::move(den);
    return f;
  }

  static ScalarFn constant(Complex value) {
    ScalarFn f;
    f.kind_ = Kind::Constant;
    f.param_ = value;
    return f;
  }

  Kind kind() const { return kind_; }
  int power() const { return power_; }
  Complex param() const { return param_; }
  const DenseVec& num() const { return num_; }
  const DenseVec& den() const { return den_; }

  /// True when the function is a polynomial term (monomial or constant), so
  /// that a problem built from such terms can take the companion route.
  bool is_polynomial() const {
    return kind_ == Kind::Monomial || kind_ == Kind::Constant;
  }

  int poly_degree() const { return kind_ == Kind::Monomial ? power_ : 0; }

  Complex operator()(Complex s) const { return derivs(s, 0)[0]; }

  /// [f(s), f'(s), ..., f^{(up_to)}(s)], exact to roundoff.
  std::vector<Complex> derivs(Complex s, int up_to) const {
    std::vector<Complex> out(up_to + 1, Complex(0, 0));
    switch (kind_) {
      case Kind::Constant:
        out[0] = param_;
        return out;
      case Kind::Monomial: {
        for (int j = 0; j <= up_to && j <= power_; ++j) {
          double fall = 1.0;
          for (int t = 0; t < j; ++t) fall *= double(power_ - t);
          out[j] = fall * detail::int_pow(s, power_ - j);
        }
        return out;
      }
      case Kind::Exponential: {
        Complex e = std::exp(param_ * s);
        Complex a(1, 0);
        for (int j = 0; j <= up_to; ++j) {
          out[j] = a * e;
          a *= param_;
        }
        return out;
      }
      case Kind::SqrtBranch: {
        Complex z = s - param_ * param_;
        if (std::abs(z) == 0.0)
          throw PoleError("ScalarFn: evaluation at the branch point", s);
        const Complex i_unit(0, 1);
        Complex root = std::sqrt(z);  // arg in (-pi, pi]
        double coeff = 1.0;
        Complex zpow(1, 0);
        for (int j = 0; j <= up_to; ++j) {
          out[j] = i_unit * coeff * root / zpow;
          coeff *= 0.5 - j;
          zpow *= z;
        }
        return out;
      }
      case Kind::Rational: {
        auto dv = detail::poly_derivs(den_, s, up_to);
        auto pv = detail::poly_derivs(num_, s, up_to);
        double scale = std::max(1.0, den_.cwiseAbs().maxCoeff());
        if (std::abs(dv[0]) <= 1e-300 * scale)
          throw PoleError("ScalarFn: evaluation at a pole", s);
        auto binom = detail::binomials(up_to);
        for (int j = 0; j <= up_to; ++j) {
          Complex acc = pv[j];
          for (int i = 1; i <= j; ++i)
            acc -= binom[j][i] * dv[i] * out[j - i];
          out[j] = acc / dv[0];
        }
        return out;
      }
    }
    throw Error("ScalarFn: unknown kind");
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Constant: return "constant";
      case Kind::Monomial: return "s^" + std::to_string(power_);
      case Kind::Exponential: return "exp(alpha*s)";
      case Kind::SqrtBranch: return "i*sqrt(s - sigma^2)";
      case Kind::Rational: return "p(s)/d(s)";
    }
    return "?";
  }

private:
  ScalarFn() = default;

  Kind kind_ = Kind::Constant;
  int power_ = 0;
  Complex param_{0, 0};
  DenseVec num_, den_;
};

inline std::vector<Complex> fn_derivs(const ScalarFn& f, Complex s, int up_to) {
  return f.derivs(s, up_to);
}

}  // namespace nepspace
