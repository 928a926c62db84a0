#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chenfliess/errors.hpp"

namespace chenfliess {

/// Smooth scalar functions R -> R from a fixed catalog, with derivatives of
/// every order in closed form. A ScalarFunction of order n evaluates the
/// n-th derivative of its base function.
///
///   polynomial(c0, c1, ...)   sum c_k x^k
///   sine(a, w, p)             a sin(w x + p)
///   cosine(a, w, p)           a cos(w x + p)
///   gauss(a, w)               a exp(-w x^2), w > 0
///   logistic(a, w, b)         a / (1 + exp(-(w x + b)))
class ScalarFunction {
 public:
  enum class Kind { polynomial, sine, cosine, gauss, logistic };

  static ScalarFunction polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    return ScalarFunction(Kind::polynomial, std::move(coeffs));
  }
  static ScalarFunction identity() { return polynomial({0.0, 1.0}); }
  static ScalarFunction constant(double c) { return polynomial({c}); }
  static ScalarFunction sine(double a = 1.0, double w = 1.0, double p = 0.0) {
    return ScalarFunction(Kind::sine, {a, w, p});
  }
  static ScalarFunction cosine(double a = 1.0, double w = 1.0, double p = 0.0) {
    return ScalarFunction(Kind::cosine, {a, w, p});
  }
  static ScalarFunction gauss(double a = 1.0, double w = 1.0) {
    if (!(w > 0.0)) throw DomainError("gauss width parameter must be positive");
    return ScalarFunction(Kind::gauss, {a, w});
  }
  static ScalarFunction logistic(double a = 1.0, double w = 1.0, double b = 0.0) {
    return ScalarFunction(Kind::logistic, {a, w, b});
  }

  Kind kind() const noexcept { return kind_; }
  int order() const noexcept { return order_; }
  const std::vector<double>& params() const noexcept { return params_; }

  ScalarFunction derivative() const {
    ScalarFunction d = *this;
    ++d.order_;
    if (kind_ == Kind::polynomial) {
      std::vector<double> c;
      for (std::size_t k = 1; k < params_.size(); ++k)
        c.push_back(params_[k] * static_cast<double>(k));
      if (c.empty()) c.push_back(0.0);
      d.params_ = std::move(c);
      d.order_ = 0;
    } else if (kind_ == Kind::logistic) {
      // P_{n+1}(s) = P_n'(s) s (1 - s), coefficients in powers of s
      std::vector<double> next(aux_.size() + 1, 0.0);
      for (std::size_t k = 1; k < aux_.size(); ++k) {
        const double dk = aux_[k] * static_cast<double>(k);
        next[k] += dk;
        next[k + 1] -= dk;
      }
      d.aux_ = std::move(next);
    }
    return d;
  }

  /// True when the function (at this order) is identically zero.
  bool is_zero() const noexcept {
    if (kind_ == Kind::polynomial) {
      for (double c : params_)
        if (c != 0.0) return false;
      return true;
    }
    return params_[0] == 0.0 || ((kind_ == Kind::sine || kind_ == Kind::cosine ||
                                  kind_ == Kind::logistic) &&
                                 order_ > 0 && params_[1] == 0.0);
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::polynomial: {
        double acc = 0.0;
        for (std::size_t k = params_.size(); k-- > 0;) acc = acc * x + params_[k];
        return acc;
      }
      case Kind::sine:
      case Kind::cosine: {
        const double a = params_[0], w = params_[1], p = params_[2];
        const double arg = w * x + p;
        // d^n/dx^n sin(u) cycles sin, cos, -sin, -cos
        const int shift = (order_ + (kind_ == Kind::cosine ? 1 : 0)) % 4;
        const double base = shift == 0 ? std::sin(arg)
                            : shift == 1 ? std::cos(arg)
                            : shift == 2 ? -std::sin(arg)
                                         : -std::cos(arg);
        return a * std::pow(w, order_) * base;
      }
      case Kind::gauss: {
        const double a = params_[0], w = params_[1];
        const double sw = std::sqrt(w);
        const double u = sw * x;
        // physicists' Hermite: H_{n+1} = 2u H_n - 2n H_{n-1}
        double h0 = 1.0, h1 = 2.0 * u;
        double hn = order_ == 0 ? h0 : h1;
        for (int n = 1; n < order_; ++n) {
          const double h2 = 2.0 * u * h1 - 2.0 * n * h0;
          h0 = h1;
          h1 = h2;
          hn = h2;
        }
        const double sign = order_ % 2 == 0 ? 1.0 : -1.0;
        return a * sign * std::pow(sw, order_) * hn * std::exp(-u * u);
      }
      case Kind::logistic: {
        const double a = params_[0], w = params_[1], b = params_[2];
        const double s = 1.0 / (1.0 + std::exp(-(w * x + b)));
        double acc = 0.0;
        for (std::size_t k = aux_.size(); k-- > 0;) acc = acc * s + aux_[k];
        return a * std::pow(w, order_) * acc;
      }
    }
    return 0.0;
  }

  std::string describe() const {
    static const char* names[] = {"poly", "sin", "cos", "gauss", "logistic"};
    std::ostringstream os;
    os << names[static_cast<int>(kind_)] << '(';
    for (std::size_t k = 0; k < params_.size(); ++k) os << (k ? "," : "") << params_[k];
    os << ')';
    for (int k = 0; k < order_; ++k) os << '\'';
    return os.str();
  }

 private:
  ScalarFunction(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {
    if (kind_ == Kind::logistic) aux_ = {0.0, 1.0};
  }

  Kind kind_;
  std::vector<double> params_;
  std::vector<double> aux_;  // logistic: derivative polynomial in sigma
  int order_ = 0;
};

}  // namespace chenfliess
