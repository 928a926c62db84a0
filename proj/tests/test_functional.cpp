#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace chenfliess;
using cftest::brownian_path;
using cftest::example_functional;
using cftest::scalar_path;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// G_t = int_0^t logistic(x_r) dr by the trapezoid rule on the grid of x.
double running_logistic(const SampledPath& x, double t) {
  double acc = 0.0;
  const auto& ts = x.times();
  for (std::size_t k = 0; k + 1 < ts.size() && ts[k] < t; ++k) {
    const double hi = std::min(ts[k + 1], t);
    acc += 0.5 * (logistic(x.node(k, 0)) + logistic(x.left_limit(hi, 0))) * (hi - ts[k]);
  }
  return acc;
}

Functional example_callable() {
  return make_callable([](double t, const SampledPath& x) { return std::sin(running_logistic(x, t)); },
                       SmoothnessClass::infinite(), {}, "example");
}

SampledPath test_path(std::uint64_t seed) { return brownian_path(seed, 1.0, 400, 1, 0.2); }

}  // namespace

TEST(ScalarFunction, DerivativesMatchClosedForms) {
  const double x = 0.37;
  const auto s = ScalarFunction::sine(2.0, 3.0, 0.5);
  EXPECT_NEAR(s.derivative()(x), 6.0 * std::cos(3 * x + 0.5), 1e-13);
  EXPECT_NEAR(s.derivative().derivative().derivative()(x), -54.0 * std::cos(3 * x + 0.5), 1e-12);
  const auto g = ScalarFunction::gauss(1.5, 2.0);
  // d/dx a e^{-w x^2} = -2 a w x e^{-w x^2}; second: a e^{-w x^2} (4 w^2 x^2 - 2 w)
  EXPECT_NEAR(g.derivative()(x), -6.0 * x * std::exp(-2 * x * x), 1e-13);
  EXPECT_NEAR(g.derivative().derivative()(x), 1.5 * std::exp(-2 * x * x) * (16 * x * x - 4), 1e-12);
  const auto l = ScalarFunction::logistic(2.0, 0.5, 0.1);
  const double sg = logistic(0.5 * x + 0.1);
  EXPECT_NEAR(l.derivative()(x), 2.0 * 0.5 * sg * (1 - sg), 1e-14);
  EXPECT_NEAR(l.derivative().derivative()(x), 2.0 * 0.25 * sg * (1 - sg) * (1 - 2 * sg), 1e-14);
  const auto p = ScalarFunction::polynomial({1, -2, 0, 4});
  EXPECT_NEAR(p.derivative()(x), -2 + 12 * x * x, 1e-14);
  EXPECT_TRUE(p.derivative().derivative().derivative().derivative().is_zero());
}

TEST(ScalarFunction, HigherDerivativesMatchFiniteDifferences) {
  const std::vector<ScalarFunction> fs{ScalarFunction::sine(1, 1.3, 0.2), ScalarFunction::cosine(0.5, 2, 0),
                                       ScalarFunction::gauss(1, 0.7), ScalarFunction::logistic(1, 1.1, -0.3)};
  const double h = 1e-4;
  for (const auto& f : fs) {
    auto d = f;
    for (int order = 1; order <= 4; ++order) {
      const auto next = d.derivative();
      for (double x : {-0.8, 0.1, 1.4})
        EXPECT_NEAR(next(x), (d(x + h) - d(x - h)) / (2 * h), 1e-6) << f.describe() << " order " << order;
      d = next;
    }
  }
}

TEST(TimeDerivative, TimeFunctionalIsOne) {
  const auto x = test_path(1);
  EXPECT_EQ(time_functional().derivative(0)(0.3, x), 1.0);
  EXPECT_NEAR(time_derivative(time_functional(), 0.3, x), 1.0, 1e-12);
}

TEST(TimeDerivative, CylinderIsZero) {
  const auto x = test_path(2);
  const auto F = make_cylinder(ScalarFunction::sine(1, 1, 0), 1);
  EXPECT_TRUE(F.derivative(0).is_zero());
  EXPECT_EQ(time_derivative(F, 0.41, x), 0.0);
}

TEST(TimeDerivative, ExampleFunctionalAnalyticAndNumeric) {
  const auto F = example_functional();
  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    const auto x = test_path(seed);
    for (double t : {0.1, 0.4025, 0.77}) {
      const double G = running_logistic(x, t);
      const double expected = logistic(x.value(t, 0)) * std::cos(G);
      EXPECT_NEAR(F(t, x), std::sin(G), 1e-14);
      EXPECT_NEAR(F.derivative(0)(t, x), expected, 1e-14);
      // extrapolated quotient error: |f'''| g^3 h^2 / 12 with h = 1e-3
      EXPECT_NEAR(time_derivative(F, t, x), expected, 1e-7);
      EXPECT_NEAR(time_derivative(example_callable(), t, x), expected, 1e-7);
    }
  }
}

TEST(TimeDerivative, OneSidedQuotientHasOrderOne) {
  const auto F = example_functional();
  const auto x = test_path(9);
  const double t = 0.5;
  const double exact = F.derivative(0)(t, x);
  std::vector<double> err;
  for (double h : {4e-2, 2e-2, 1e-2, 5e-3}) err.push_back(std::abs(time_quotient(F, t, x, h) - exact));
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    EXPECT_NEAR(order, 1.0, 0.1);
  }
}

TEST(TimeDerivative, NoExtensionPastHorizon) {
  const auto x = test_path(10);
  EXPECT_THROW(time_derivative(example_functional(), 1.0, x), DomainError);
}

TEST(SpaceDerivative, EndpointCoordinates) {
  const auto x = brownian_path(11, 1.0, 100, 2);
  const double t = 0.6;
  EXPECT_EQ(coordinate(2).derivative(2)(t, x), 1.0);
  EXPECT_EQ(coordinate(2).derivative(1)(t, x), 0.0);
  EXPECT_NEAR(space_derivative(coordinate(2), 2, t, x), 1.0, 1e-10);
  const auto sq = product(coordinate(1), coordinate(1));
  const double a = x.value(t, 0);
  EXPECT_NEAR(sq.derivative(1)(t, x), 2 * a, 1e-15);
  EXPECT_NEAR(space_derivative(sq, 1, t, x), 2 * a, 1e-9);
  EXPECT_TRUE(coordinate(1).derivative(MultiIndex{1, 1}).is_zero());
}

TEST(SpaceDerivative, ExampleFunctionalIsZero) {
  const auto x = test_path(12);
  EXPECT_TRUE(example_functional().derivative(1).is_zero());
  EXPECT_EQ(space_derivative(example_functional(), 1, 0.5, x), 0.0);
  EXPECT_EQ(space_derivative(example_callable(), 1, 0.5, x), 0.0);
}

TEST(SpaceDerivative, CentralQuotientHasOrderTwo) {
  const auto F = make_cylinder(ScalarFunction::sine(1, 1, 0), 1);
  const auto x = test_path(13);
  const double t = 0.3;
  const double exact = std::cos(x.value(t, 0));
  EXPECT_NEAR(space_derivative(F, 1, t, x, 1e-4), exact, 1e-6);
  std::vector<double> err;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) err.push_back(std::abs(space_derivative(F, 1, t, x, eps) - exact));
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_NEAR(std::log2(err[k - 1] / err[k]), 2.0, 0.1);
}

TEST(DerivativeWord, MixedOnExample) {
  const auto F = example_functional();
  const auto x = test_path(14);
  for (double t : {0.2, 0.65}) {
    const double G = running_logistic(x, t);
    const double xt = x.value(t, 0);
    const double s = logistic(xt);
    // d1 d0 F = g'(x_t) f'(G)
    EXPECT_NEAR(derivative_word(F, {1, 0}, t, x), s * (1 - s) * std::cos(G), 1e-14);
    // d0 d0 F = g(x_t)^2 f''(G), since stopping freezes g(x_t)
    EXPECT_NEAR(derivative_word(F, {0, 0}, t, x), -s * s * std::sin(G), 1e-14);
    EXPECT_TRUE(F.derivative(MultiIndex{0, 1}).is_zero());
  }
}

TEST(DerivativeWord, NestedNumericAgreesWithAnalytic) {
  const auto x = test_path(15);
  const auto C = example_callable();
  const auto F = example_functional();
  for (double t : {0.25, 0.6}) {
    EXPECT_NEAR(C.derivative(MultiIndex{0, 0})(t, x), F.derivative(MultiIndex{0, 0})(t, x), 1e-5);
    EXPECT_NEAR(C.derivative(MultiIndex{1, 0})(t, x), F.derivative(MultiIndex{1, 0})(t, x), 1e-5);
  }
}

TEST(DerivativeWord, DepthThreeNeedsAnalyticDerivatives) {
  const auto x = test_path(16);
  const auto C = example_callable();
  EXPECT_THROW(C.derivative(MultiIndex{1, 0, 0}), ContractError);
  EXPECT_NO_THROW(example_functional().derivative(MultiIndex{1, 0, 0})(0.5, x));
}

TEST(DerivativeWord, OutsideDeclaredClassIsContractError) {
  const auto C = make_callable([](double t, const SampledPath&) { return t; }, {1, 0});
  EXPECT_NO_THROW(C.derivative(MultiIndex{0}));
  EXPECT_THROW(C.derivative(MultiIndex{1}), ContractError);
  EXPECT_THROW(C.derivative(MultiIndex{0, 0}), ContractError);
}

TEST(Cylinder, SmoothPointFunctionPartials) {
  // f(t, y) = t * y1
  SmoothPointFunction y1{[](double, std::span<const double> y) { return y[0]; }, nullptr, "y1"};
  SmoothPointFunction tt{[](double t, std::span<const double>) { return t; }, nullptr, "t"};
  SmoothPointFunction f{[](double t, std::span<const double> y) { return t * y[0]; },
                        [=](int i) -> std::optional<SmoothPointFunction> {
                          if (i == 0) return y1;
                          if (i == 1) return tt;
                          return std::nullopt;
                        },
                        "t*y1"};
  const auto F = make_cylinder(f);
  const auto x = test_path(17);
  EXPECT_DOUBLE_EQ(F.derivative(0)(0.4, x), x.value(0.4, 0));
  EXPECT_DOUBLE_EQ(F.derivative(1)(0.4, x), 0.4);
  EXPECT_NEAR(time_derivative(F, 0.4, x), x.value(0.4, 0), 1e-12);
  EXPECT_NEAR(space_derivative(F, 1, 0.4, x), 0.4, 1e-10);
  EXPECT_THROW(F.derivative(MultiIndex{1, 1}), ContractError);
}

TEST(RunningIntegral, WorkedValues) {
  const auto x = scalar_path([](double r) { return r; }, 1.0, 16);
  const auto one = make_running_integral(ScalarFunction::identity(), ScalarFunction::constant(1.0));
  EXPECT_NEAR(one(0.7, x), 0.7, 1e-15);
  const auto half = make_running_integral(ScalarFunction::identity(), ScalarFunction::identity());
  EXPECT_NEAR(half(1.0, x), 0.5, 1e-15);
  // along() agrees with pointwise evaluation at the nodes
  const auto F = example_functional();
  const auto b = test_path(18);
  const auto v = F.along(b);
  for (std::size_t k = 0; k < b.size(); k += 37) EXPECT_NEAR(v[k], F(b.times()[k], b), 1e-14);
}

TEST(Product, IdentityAndLeibniz) {
  const auto x = brownian_path(19, 1.0, 200, 2, 0.1);
  const auto F = example_functional();
  const auto G = compose(ScalarFunction::cosine(1, 1, 0), coordinate(2)) + time_functional();
  EXPECT_EQ(product(F, constant(1.0)).ptr(), F.ptr());
  const auto FG = product(F, G);
  for (double t : {0.3, 0.55}) {
    for (int i = 0; i <= 2; ++i) {
      const double rule = F.derivative(i)(t, x) * G(t, x) + F(t, x) * G.derivative(i)(t, x);
      EXPECT_NEAR(FG.derivative(i)(t, x), rule, 1e-14);
      for (int j = 0; j <= 2; ++j) {
        const double two = F.derivative(MultiIndex{j, i})(t, x) * G(t, x) +
                           F.derivative(i)(t, x) * G.derivative(j)(t, x) +
                           F.derivative(j)(t, x) * G.derivative(i)(t, x) +
                           F(t, x) * G.derivative(MultiIndex{j, i})(t, x);
        EXPECT_NEAR(FG.derivative(MultiIndex{j, i})(t, x), two, 1e-13);
      }
    }
    // numeric on both sides of the rule
    const auto Fc = example_callable();
    const double lhs = space_derivative(product(Fc, G), 2, t, x);
    const double rhs = space_derivative(Fc, 2, t, x) * G(t, x) + Fc(t, x) * space_derivative(G, 2, t, x);
    EXPECT_NEAR(lhs, rhs, 1e-8);
  }
}

TEST(Functional, NonanticipativeForBuiltIns) {
  const auto x = brownian_path(20, 1.0, 100, 2, 0.3);
  const auto y = brownian_path(21, 1.0, 100, 2, 0.3);
  const double t = 0.45;
  // z agrees with x on [0, t] and follows another path afterwards
  std::vector<double> times, vals;
  for (std::size_t k = 0; k < x.size(); ++k) {
    times.push_back(x.times()[k]);
    for (std::size_t c = 0; c < 2; ++c)
      vals.push_back(x.times()[k] <= t ? x.node(k, c) : y.node(k, c) + 5.0);
  }
  const SampledPath z(times, vals, 2);
  const std::vector<Functional> fs{
      example_functional(),
      time_functional(),
      coordinate(2),
      make_cylinder(ScalarFunction::gauss(1, 1), 2),
      product(example_functional(), coordinate(1)),
      make_running_integral(ScalarFunction::cosine(1, 1, 0), ScalarFunction::identity(), 2),
      example_callable()};
  for (const auto& F : fs) {
    EXPECT_EQ(F(t, x), F(t, z)) << F.describe();
    EXPECT_EQ(F(t, x), F(t, stop_at(x, t))) << F.describe();
  }
}

TEST(Functional, BoundedOnCorpusForBoundedCatalog) {
  const auto F = example_functional();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = brownian_path(100 + s, 1.0, 64, 1, 0.0);
    for (double t : {0.0, 0.5, 1.0}) {
      EXPECT_LE(std::abs(F(t, x)), 1.0);
      EXPECT_LE(std::abs(F.derivative(0)(t, x)), 1.0);
      EXPECT_LE(std::abs(F.derivative(MultiIndex{1, 0})(t, x)), 0.25);
    }
  }
}
