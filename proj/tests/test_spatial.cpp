#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sgfem/spatial.hpp"

using namespace sgfem;
using std::numbers::pi;

namespace {

double slope(const std::vector<double>& h, const std::vector<double>& e) {
  // least squares of log e against log h
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Quadrature, ReferenceExactness) {
  for (int deg = 0; deg <= 8; ++deg) {
    const auto r1 = reference_quadrature(1, deg);
    double s = 0;
    for (std::size_t i = 0; i < r1.points.size(); ++i) s += r1.weights[i] * std::pow(r1.points[i](0), deg);
    EXPECT_NEAR(s, 1.0 / (deg + 1), 1e-14);
    const auto r2 = reference_quadrature(2, deg);
    for (int a = 0; a <= deg; ++a) {
      const int b = deg - a;
      double t = 0;
      for (std::size_t i = 0; i < r2.points.size(); ++i)
        t += r2.weights[i] * std::pow(r2.points[i](0), a) * std::pow(r2.points[i](1), b);
      // int_T u^a v^b = a! b! / (a + b + 2)!
      const double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
      EXPECT_NEAR(t, exact, 1e-14) << a << "," << b;
    }
  }
}

TEST(Mesh, Geometry) {
  EXPECT_EQ(Mesh::unit_square(4).num_cells(), 32u);
  EXPECT_DOUBLE_EQ(Mesh::interval(8).h(), 0.125);
  EXPECT_EQ(FeSpace(Mesh::interval(8), 2).num_dofs(), 15u);
  EXPECT_EQ(FeSpace(Mesh::unit_square(4), 1).num_dofs(), 9u);
  EXPECT_EQ(FeSpace(Mesh::unit_square(4), 2).num_dofs(), 49u);
  EXPECT_THROW(FeSpace(Mesh::interval(4), 3), std::invalid_argument);
  EXPECT_THROW(Mesh(3, 2), std::invalid_argument);
}

TEST(Mass, OneDimensionalP1) {
  const int m = 8;
  const double h = 1.0 / m;
  const auto M = assemble_mass(FeSpace(Mesh::interval(m), 1)).dense();
  for (int i = 0; i < m - 1; ++i) {
    EXPECT_NEAR(M(i, i), 2 * h / 3, 1e-15);
    if (i + 1 < m - 1) EXPECT_NEAR(M(i, i + 1), h / 6, 1e-15);
    if (i + 2 < m - 1) EXPECT_EQ(M(i, i + 2), 0.0);
  }
  const auto M2 = assemble_mass(FeSpace(Mesh::interval(2), 1)).dense();
  ASSERT_EQ(M2.rows(), 1);
  EXPECT_NEAR(M2(0, 0), 1.0 / 3, 1e-15);
}

TEST(Mass, DefiniteAndSymmetric) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  for (int dim : {1, 2})
    for (int order : {1, 2}) {
      const FeSpace s(Mesh(dim, 4), order);
      const auto M = assemble_mass(s);
      EXPECT_EQ(asymmetry(M.matrix()), 0.0);
      for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(s.num_dofs()));
        for (auto& v : x) v = g(rng);
        EXPECT_GT(x.dot(M.matrix() * x), 0.0);
      }
    }
}

TEST(Stiffness, OneDimensionalP1AndLinearity) {
  const int m = 8;
  const double h = 1.0 / m;
  const FeSpace s(Mesh::interval(m), 1);
  const auto K = assemble_stiffness(s, identity_coefficient()).dense();
  for (int i = 0; i < m - 1; ++i) {
    EXPECT_NEAR(K(i, i), 2 / h, 1e-12);
    if (i + 1 < m - 1) EXPECT_NEAR(K(i, i + 1), -1 / h, 1e-12);
  }
  const auto K3 = assemble_stiffness(s, [](const Point&) { return (3.0 * Eigen::Matrix2d::Identity()).eval(); }).dense();
  EXPECT_NEAR((K3 - 3.0 * K).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Stiffness, RejectsNonHermitian) {
  const FeSpace s(Mesh::unit_square(2), 1);
  auto bad = [](const Point&) {
    Eigen::Matrix2d m;
    m << 1, 0.5, 0, 1;
    return m;
  };
  EXPECT_THROW(assemble_stiffness(s, bad), std::invalid_argument);
}

TEST(Stiffness, AnisotropicSymmetricAndCoercive) {
  const FeSpace s(Mesh::unit_square(4), 2);
  auto field = [](const Point& x) {
    const double r2 = x.squaredNorm();
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    m(0, 0) = 1 + r2;
    m(1, 1) = 3 - r2;
    return m;
  };
  const auto K = assemble_stiffness(s, field);
  EXPECT_EQ(asymmetry(K.matrix()), 0.0);
  const double lmin = min_generalized_eigenvalue(K.dense(), h1_gram(s).dense());
  EXPECT_GE(lmin, 1.0 - 1e-8);
}

TEST(Poisson, TwoDimensionalP2Manufactured) {
  const FeSpace s(Mesh::unit_square(2), 2);
  const auto u = stationary_solve(s, identity_coefficient(),
                                  [](const Point& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); });
  const double e = l2_error(s, u, [](const Point& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)) / (2 * pi * pi); });
  // |u|_{H^3} ~ pi^3 / (2 pi^2) / 2 and h^3 = 2^{-3/2}: the error sits well under h^3 |u|_3.
  EXPECT_LT(e, std::pow(s.mesh().h(), 3) * pi / 4);
  const FeSpace s4(Mesh::unit_square(4), 2);
  const auto u4 = stationary_solve(s4, identity_coefficient(),
                                   [](const Point& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); });
  const double e4 = l2_error(s4, u4, [](const Point& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)) / (2 * pi * pi); });
  EXPECT_GT(std::log2(e / e4), 2.7);
}

TEST(Projection, ReproducesSpaceAndZero) {
  for (int dim : {1, 2})
    for (int order : {1, 2}) {
      const FeSpace s(Mesh(dim, 4), order);
      Eigen::VectorXd v(static_cast<Eigen::Index>(s.num_dofs()));
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::cos(0.7 * static_cast<double>(i));
      const auto p = l2_project(s, [&](const Point& x) { return evaluate(s, v, x); });
      EXPECT_LT((p - v).lpNorm<Eigen::Infinity>(), 1e-10);
      EXPECT_EQ(l2_project(s, [](const Point&) { return 0.0; }).lpNorm<Eigen::Infinity>(), 0.0);
    }
}

TEST(Projection, SineNodalDeviation) {
  const FeSpace s(Mesh::interval(16), 1);
  const auto p = l2_project(s, [](const Point& x) { return std::sin(pi * x(0)); });
  const auto pts = s.dof_coordinates();
  double dev = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    dev = std::max(dev, std::abs(p(static_cast<Eigen::Index>(i)) - std::sin(pi * pts[i](0))));
  const double h = s.mesh().h();
  EXPECT_LE(dev, h * h);
}

TEST(Stationary, ExamplesAndRates) {
  auto rhs = [](const Point& x) { return pi * pi * std::sin(pi * x(0)); };
  auto exact = [](const Point& x) { return std::sin(pi * x(0)); };
  const FeSpace s(Mesh::interval(16), 1);
  const auto u1 = stationary_solve(s, identity_coefficient(), rhs);
  const auto u2 = stationary_solve(s, [](const Point&) { return (2.0 * Eigen::Matrix2d::Identity()).eval(); },
                                   [&](const Point& x) { return 2 * rhs(x); });
  EXPECT_LT((u1 - u2).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(stationary_solve(s, identity_coefficient(), [](const Point&) { return 0.0; }).lpNorm<Eigen::Infinity>(), 0.0);
  for (int order : {1, 2}) {
    std::vector<double> hs, es;
    for (int m : {8, 16, 32, 64}) {
      const FeSpace sp(Mesh::interval(m), order);
      es.push_back(l2_error(sp, stationary_solve(sp, identity_coefficient(), rhs), exact));
      hs.push_back(sp.mesh().h());
    }
    EXPECT_GE(slope(hs, es), order == 1 ? 1.8 : 2.8);
  }
}

TEST(Prolongation, NestedExact) {
  const FeSpace c(Mesh::unit_square(2), 1), f(Mesh::unit_square(4), 2);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(c.num_dofs()), 0.5, 1.5);
  const auto pv = prolongate(c, f, v);
  for (const Point& x : {Point(0.3, 0.7), Point(0.61, 0.2), Point(0.5, 0.5)})
    EXPECT_NEAR(evaluate(c, v, x), evaluate(f, pv, x), 1e-14);
  EXPECT_LT((prolongation_matrix(c, f) * v - pv).norm(), 1e-14);
  EXPECT_THROW(prolongate(FeSpace(Mesh::unit_square(3), 1), f, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(Export, CooText) {
  const auto M = assemble_mass(FeSpace(Mesh::interval(3), 1));
  EXPECT_EQ(M.to_coo_text(),
            "0 0 0.22222222222222221\n0 1 0.055555555555555552\n1 0 0.055555555555555552\n1 1 0.22222222222222221\n");
}

TEST(Solver, IterativeFallback) {
  const FeSpace s(Mesh::interval(60000), 1);
  const auto M = assemble_mass(s);
  const SymmetricSolver solver(M.matrix());
  EXPECT_FALSE(solver.is_direct());
  Eigen::VectorXd b = Eigen::VectorXd::Ones(M.rows());
  const auto x = solver.solve(b);
  EXPECT_LE(solver.backward_error(x, b), 1e-11);
}
