#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace chenfliess;
using cftest::brownian_path;
using cftest::scalar_path;

namespace {

void expect_same_nodes(const SampledPath& a, const SampledPath& b, double tol = 0.0) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.times()[k], b.times()[k]);
    for (std::size_t c = 0; c < a.dim(); ++c) EXPECT_NEAR(a.node(k, c), b.node(k, c), tol);
  }
}

}  // namespace

TEST(SampledPath, RejectsBadGrids) {
  EXPECT_THROW(SampledPath({0.1, 1.0}, {0.0, 1.0}, 1), DomainError);
  EXPECT_THROW(SampledPath({0.0, 0.5, 0.4, 1.0}, {0, 0, 0, 0}, 1), DomainError);
  EXPECT_THROW(SampledPath({0.0, 0.5, 0.5, 0.5, 1.0}, {0, 0, 1, 2, 2}, 1), DomainError);
  EXPECT_THROW(SampledPath({0.0, 1.0}, {0.0, std::nan("")}, 1), DomainError);
  EXPECT_THROW(SampledPath({0.0, 1.0}, {0.0, 1.0, 2.0}, 1), DomainError);
}

TEST(SampledPath, LinearAndCadlagEvaluation) {
  const SampledPath lin({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, 1);
  EXPECT_DOUBLE_EQ(lin.value(0.5, 0), 1.0);
  EXPECT_DOUBLE_EQ(lin.value(1.5, 0), 1.0);
  const SampledPath cad({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0}, 1, Interpolation::cadlag);
  EXPECT_DOUBLE_EQ(cad.value(0.99, 0), 0.0);
  EXPECT_DOUBLE_EQ(cad.value(1.0, 0), 2.0);
  EXPECT_DOUBLE_EQ(cad.left_limit(1.0, 0), 0.0);
}

TEST(SampledPath, OutOfRangeTimeIsDomainError) {
  const auto x = scalar_path([](double r) { return r; }, 1.0, 4);
  EXPECT_THROW(x.value(1.5, 0), DomainError);
  EXPECT_THROW(stop_at(x, -0.1), DomainError);
}

TEST(StopAt, AtHorizonIsIdentity) {
  const auto b = brownian_path(3, 1.0, 64);
  const auto s = stop_at(b, 1.0);
  for (double r : b.times()) EXPECT_EQ(s.value(r, 0), b.value(r, 0));
}

TEST(StopAt, AtZeroIsConstant) {
  const auto b = brownian_path(4, 1.0, 64, 1, 0.7);
  const auto s = stop_at(b, 0.0);
  for (double r : {0.0, 0.3, 1.0}) EXPECT_EQ(s.value(r, 0), 0.7);
}

TEST(StopAt, FreezesLinearPathAtHalf) {
  const auto b = scalar_path([](double r) { return r; }, 1.0, 10);
  const auto s = stop_at(b, 0.5);
  EXPECT_DOUBLE_EQ(s.value(0.25, 0), 0.25);
  EXPECT_DOUBLE_EQ(s.value(0.5, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.value(0.9, 0), 0.5);
}

TEST(StopAt, IdempotentAndNested) {
  const auto x = brownian_path(5, 1.0, 50, 2);
  const auto a = stop_at(x, 0.63);
  expect_same_nodes(stop_at(a, 0.63), a);
  for (double s : {0.0, 0.2, 0.41, 0.63}) {
    const auto direct = stop_at(x, s);
    const auto nested = stop_at(stop_at(x, 0.63), s);
    for (double r = 0.0; r <= 1.0; r += 0.01)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(direct.value(r, c), nested.value(r, c), 1e-15);
  }
}

TEST(OneVarNorm, MonotoneZigzagConstant) {
  EXPECT_DOUBLE_EQ(one_var_norm(scalar_path([](double r) { return 2 * r; }, 1.0, 7)), 2.0);
  EXPECT_DOUBLE_EQ(one_var_norm(SampledPath({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}, 1)), 2.0);
  const std::vector<double> c{1.5};
  EXPECT_DOUBLE_EQ(one_var_norm(SampledPath::constant(c, 1.0)), 0.0);
}

TEST(OneVarNorm, CountsJumpMagnitudes) {
  const SampledPath j({0.0, 0.5, 0.5, 1.0}, {0.0, 0.0, 3.0, 3.0}, 1, Interpolation::cadlag);
  EXPECT_DOUBLE_EQ(one_var_norm(j), 3.0);
}

TEST(RhoOneVar, WorkedExamples) {
  const auto x = scalar_path([](double r) { return r; }, 1.0, 8);
  const auto y = scalar_path([](double r) { return 2 * r; }, 1.0, 8);
  EXPECT_DOUBLE_EQ(rho_one_var({0.5, x}, {0.5, x}), 0.0);
  EXPECT_NEAR(rho_one_var({0.5, x}, {0.5, y}), 0.5, 1e-15);
  // same path, different times: |t - s| + variation of a_t x - a_s x
  EXPECT_NEAR(rho_one_var({0.75, x}, {0.25, x}), 0.5 + 0.5, 1e-15);
}

TEST(RhoInfty, WorkedExamples) {
  const auto x = scalar_path([](double r) { return r; }, 1.0, 8);
  const auto y = scalar_path([](double r) { return 2 * r; }, 1.0, 8);
  EXPECT_DOUBLE_EQ(rho_infty({0.5, x}, {0.5, x}), 0.0);
  EXPECT_NEAR(rho_infty({0.5, x}, {0.5, y}), 0.5, 1e-15);
  const std::vector<double> c1{1.0}, c2{3.5};
  EXPECT_DOUBLE_EQ(rho_infty({0.3, SampledPath::constant(c1, 1.0)}, {0.3, SampledPath::constant(c2, 1.0)}),
                   2.5);
}

TEST(Metrics, AxiomsOnRandomTriples) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const StoppedPoint a{0.1 + 0.04 * double(s), brownian_path(100 + s, 1.0, 17 + s)};
    const StoppedPoint b{0.9 - 0.03 * double(s), brownian_path(200 + s, 1.0, 23)};
    const StoppedPoint c{0.5, brownian_path(300 + s, 1.0, 31)};
    for (auto rho : {rho_one_var, rho_infty}) {
      EXPECT_NEAR(rho(a, b), rho(b, a), 1e-12);
      EXPECT_EQ(rho(a, a), 0.0);
      EXPECT_GT(rho(a, b), 0.0);
      EXPECT_LE(rho(a, c), rho(a, b) + rho(b, c) + 1e-12);
    }
    // common initial value 0: sup of the difference is bounded by its variation
    EXPECT_LE(rho_infty(a, b), rho_one_var(a, b) + 1e-12);
  }
}

TEST(Bump, ZeroEpsReturnsInput) {
  const auto x = brownian_path(6, 1.0, 20);
  expect_same_nodes(bump(x, 0.4, 1, 0.0), x);
}

TEST(Bump, AtZeroShiftsConstantPath) {
  const std::vector<double> z{0.0};
  const auto b = bump(SampledPath::constant(z, 1.0), 0.0, 1, 1.0);
  for (double r : {0.0, 0.5, 1.0}) EXPECT_EQ(b.value(r, 0), 1.0);
}

TEST(Bump, LeavesPastUnchangedAndShiftsFromT) {
  const auto x = brownian_path(7, 1.0, 40, 2);
  const double t = 0.3625;
  const auto b = bump(x, t, 2, 0.25);
  EXPECT_TRUE(b.has_jumps());
  for (double r = 0.0; r < t; r += 0.01) {
    EXPECT_EQ(b.value(r, 0), x.value(r, 0));
    EXPECT_NEAR(b.value(r, 1), x.value(r, 1), 1e-15);
  }
  EXPECT_NEAR(b.left_limit(t, 1), x.value(t, 1), 1e-15);
  for (double r = t; r <= 1.0; r += 0.01) EXPECT_NEAR(b.value(r, 1), x.value(r, 1) + 0.25, 1e-14);
  EXPECT_THROW(bump(x, t, 3, 0.1), DomainError);
}

TEST(Bump, CommutesWithStopping) {
  const auto x = brownian_path(8, 1.0, 32);
  for (double u : {0.0, 0.2, 0.5}) {
    const auto lhs = stop_at(bump(x, u, 1, 0.3), 0.5);
    const auto rhs = bump(stop_at(x, 0.5), u, 1, 0.3);
    for (double r = 0.0; r <= 1.0; r += 0.005) EXPECT_NEAR(lhs.value(r, 0), rhs.value(r, 0), 1e-15);
  }
}

TEST(PathCsv, RoundTripIsExact) {
  const auto x = bump(brownian_path(9, 1.0, 16, 2), 0.5, 1, 0.1);
  std::stringstream ss;
  write_path_csv(ss, x);
  const auto y = read_path_csv(ss);
  expect_same_nodes(x, y);
}
