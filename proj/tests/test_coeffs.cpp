#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sgfem/coeffs.hpp"

using namespace sgfem;

namespace {

std::vector<std::vector<double>> z_grid(int count, double lo, double hi) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < count; ++i) out.push_back({lo + (hi - lo) * i / (count - 1)});
  return out;
}

std::vector<Point> square_grid(int count) {
  std::vector<Point> out;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) out.emplace_back(static_cast<double>(i) / (count - 1), static_cast<double>(j) / (count - 1));
  return out;
}

}  // namespace

TEST(Separable, ConstantUnit) {
  const auto f = builtin_separable(constant_factor(1.0), identity_field(), 2);
  EXPECT_EQ(f.kappa(), 1.0);
  EXPECT_EQ(f.K(), 1.0);
  const std::vector<double> z = {0.3};
  EXPECT_EQ(f(z, Point(0.2, 0.4)), Eigen::Matrix2d::Identity());
  EXPECT_TRUE(eval_bounds_check(f, z_grid(5, -3, 3), square_grid(4)).ok());
}

TEST(Separable, LogisticAnisotropicBounds) {
  const auto f = builtin_separable(logistic_factor(), anisotropic_field(2), 2);
  EXPECT_DOUBLE_EQ(f.kappa(), 1.0);
  EXPECT_DOUBLE_EQ(f.K(), 6.0);
  const auto rep = eval_bounds_check(f, z_grid(10, -10, 10), square_grid(10));
  EXPECT_EQ(rep.samples, 1000u);
  EXPECT_TRUE(rep.ok());
  const std::vector<double> z0 = {0.0};
  EXPECT_DOUBLE_EQ(logistic_factor().value(z0), 1.5);
}

TEST(Separable, OverstatedKappaIsReported) {
  const auto base = builtin_separable(logistic_factor(), anisotropic_field(2), 2);
  const CoefficientField lying("lying", 2, [base](std::span<const double> z, const Point& x) { return (0.5 * base(z, x)).eval(); },
                               1.0, 6.0, true, std::nullopt, 2);
  const auto rep = eval_bounds_check(lying, z_grid(10, -10, 10), square_grid(10));
  EXPECT_FALSE(rep.ok());
  EXPECT_LT(rep.observed_min, 1.0);
}

TEST(Separable, RejectsNonElliptic) {
  EXPECT_THROW(builtin_separable(affine_factor(1.0, 0.5), identity_field(), 1), std::invalid_argument);
  const auto f = builtin_separable(affine_factor(1.0, 0.5), identity_field(), 1, true);
  EXPECT_FALSE(f.elliptic());
  EXPECT_THROW(builtin_separable(constant_factor(0.0), identity_field(), 1), std::invalid_argument);
  EXPECT_THROW(eval_bounds_check(f, {}, square_grid(2)), std::invalid_argument);
}

TEST(Separable, HermitianEvaluations) {
  const auto f = builtin_separable(logistic_factor(), anisotropic_field(2), 2);
  for (const auto& z : z_grid(7, -4, 4))
    for (const auto& x : square_grid(5)) {
      const auto m = f(z, x);
      EXPECT_EQ(m(0, 1), m(1, 0));
    }
}

TEST(Logistic, DerivativesMatchFiniteDifferences) {
  const auto f = logistic_factor();
  for (int i = 1; i <= 4; ++i) {
    const auto& d = f.derivatives.at({i});
    const auto& dm1 = f.derivatives.at({i - 1});
    double max_abs = 0.0;
    for (double z = -10; z <= 10; z += 0.25) {
      const double h = 1e-4;
      const std::vector<double> zp = {z + h}, zm = {z - h}, z0 = {z};
      const double fd = (dm1(zp) - dm1(zm)) / (2 * h);
      const double ex = d(z0);
      EXPECT_NEAR(fd, ex, 1e-6 * std::max(1.0, std::abs(ex))) << "i=" << i << " z=" << z;
      max_abs = std::max(max_abs, std::abs(ex));
    }
    EXPECT_TRUE(std::isfinite(max_abs));
    EXPECT_LE(max_abs, 1.0);
  }
}

TEST(Registry, Names) {
  EXPECT_EQ(random_factor_by_name("logistic", 1).name, "logistic");
  EXPECT_EQ(spatial_field_by_name("anisotropic", 2).upper, 3.0);
  const auto u = initial_datum_by_name("sine_series", {{"c1", 1.0}, {"c2", 0.5}});
  EXPECT_EQ(u.sine_coeffs.size(), 2u);
  const std::vector<double> z = {0.0};
  EXPECT_NEAR(u.eval(z, Point(0.25, 0)), std::sin(std::numbers::pi / 4) + 0.5, 1e-15);
  EXPECT_THROW(random_factor_by_name("nope", 1), std::invalid_argument);
  EXPECT_THROW(spatial_field_by_name("nope", 1), std::invalid_argument);
  EXPECT_THROW(initial_datum_by_name("nope"), std::invalid_argument);
}
