#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "chenfliess/chenfliess.hpp"

namespace cftest {

using namespace chenfliess;

inline SampledPath scalar_path(const std::function<double(double)>& f, double T, std::size_t n) {
  return SampledPath::sample([&](double r) { return std::vector<double>{f(r)}; }, T, n);
}

/// Piecewise-linear Brownian-like path of dimension `dim` from the library's
/// counter RNG, started at x0.
inline SampledPath brownian_path(std::uint64_t seed, double T, std::size_t n, std::size_t dim = 1,
                                 double x0 = 0.0) {
  std::vector<double> times(n + 1), vals((n + 1) * dim, x0);
  for (std::size_t k = 0; k <= n; ++k) times[k] = k == n ? T : T * double(k) / double(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t c = 0; c < dim; ++c)
      vals[(k + 1) * dim + c] =
          vals[k * dim + c] + std::sqrt(times[k + 1] - times[k]) * rng::normal(seed, 0, k, c);
  return SampledPath(std::move(times), std::move(vals), dim);
}

/// F(t, x) = f(int_0^t g(x_r) dr) with f = sin, g = logistic.
inline Functional example_functional() {
  return make_running_integral(ScalarFunction::sine(1, 1, 0), ScalarFunction::logistic(1, 1, 0), 1);
}

// --- forward-mode dual numbers -------------------------------------------
// Nesting Dual<Dual<double>> gives exact higher derivatives, independent of
// the library's symbolic derivative rules.

template <class T>
struct Dual {
  T v{};
  T d{};
};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator*(double c, const Dual<T>& a) { return {c * a.v, c * a.d}; }
template <class T> Dual<T> operator+(double c, const Dual<T>& a) { return {c + a.v, a.d}; }
template <class T> Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), cos(a.v) * a.d};
}
template <class T> Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -1.0 * (sin(a.v) * a.d)};
}

template <class T> T lift(double c) {
  if constexpr (std::is_same_v<T, double>) {
    return c;
  } else {
    return T{lift<decltype(T{}.v)>(c), lift<decltype(T{}.v)>(0.0)};
  }
}

/// Test problem with generic components, evaluated by duals in the oracle and
/// mirrored with library functionals.
///   d = e = 2:
///   V1(y) = (1 + 0.5 sin y1, 0.3 y1 y2)
///   V2(y) = (0.7 cos y2, 1 - 0.2 y1^2)
///   f(y)  = sin(y1) cos(y2)
///   d = e = 1 uses the first coordinates: V1(y) = 1 + 0.5 sin y, f = sin y.
struct ClassicalProblem {
  int d = 2;

  template <class T>
  std::vector<T> field(int i, const std::vector<T>& y) const {
    using std::cos;
    using std::sin;
    if (d == 1) return {1.0 + 0.5 * sin(y[0])};
    if (i == 1) return {1.0 + 0.5 * sin(y[0]), 0.3 * (y[0] * y[1])};
    return {0.7 * cos(y[1]), 1.0 + (-0.2) * (y[0] * y[0])};
  }

  template <class T>
  T f(const std::vector<T>& y) const {
    using std::cos;
    using std::sin;
    return d == 1 ? sin(y[0]) : sin(y[0]) * cos(y[1]);
  }

  /// (V_{w[pos]} ... V_{w.back()} f)(y): the last letter acts first.
  template <int Depth, class T>
  T classical(const std::vector<int>& w, std::size_t pos, const std::vector<T>& y) const {
    if (pos == w.size()) return f(y);
    if constexpr (Depth > 0) {
      T acc = lift<T>(0.0);
      const auto v = field(w[pos], y);
      for (std::size_t j = 0; j < y.size(); ++j) {
        std::vector<Dual<T>> yd(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) yd[k] = {y[k], lift<T>(k == j ? 1.0 : 0.0)};
        acc = acc + v[j] * classical<Depth - 1, Dual<T>>(w, pos + 1, yd).d;
      }
      return acc;
    } else {
      throw std::logic_error("oracle word too long");
    }
  }

  double classical_action(const MultiIndex& w, const std::vector<double>& y) const {
    return classical<3, double>(w.letters(), 0, y);
  }

  VectorFieldSet library_fields() const {
    const auto sinf = ScalarFunction::sine(1, 1, 0);
    const auto cosf = ScalarFunction::cosine(1, 1, 0);
    if (d == 1)
      return VectorFieldSet(1, {VectorField::zero(1),
                                VectorField{{constant(1.0) + 0.5 * compose(sinf, coordinate(1))}}});
    VectorField v1{{constant(1.0) + 0.5 * compose(sinf, coordinate(1)),
                    0.3 * product(coordinate(1), coordinate(2))}};
    VectorField v2{{0.7 * compose(cosf, coordinate(2)),
                    constant(1.0) + (-0.2) * product(coordinate(1), coordinate(1))}};
    return VectorFieldSet(2, {VectorField::zero(2), v1, v2});
  }

  Functional library_functional() const {
    const auto sinf = ScalarFunction::sine(1, 1, 0);
    const auto cosf = ScalarFunction::cosine(1, 1, 0);
    if (d == 1) return compose(sinf, coordinate(1));
    return product(compose(sinf, coordinate(1)), compose(cosf, coordinate(2)));
  }
};

}  // namespace cftest
