#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sgfem/spatial.hpp"
#include "sgfem/timestep.hpp"

using namespace sgfem;
using std::numbers::pi;

namespace {

SparseMatrix scalar(double v) {
  SparseMatrix m(1, 1);
  m.insert(0, 0) = v;
  return m;
}

}  // namespace

TEST(Scheme, AStability) {
  for (const auto& s : {RationalScheme::implicit_euler(), RationalScheme::crank_nicolson()}) {
    const auto p = s.a_stability_probe();
    EXPECT_TRUE(p.a_stable) << s.name();
    EXPECT_LE(p.max_abs_boundary, 1.0 + 1e-12);
  }
  EXPECT_EQ(RationalScheme::by_name("crank_nicolson").order(), 2);
  EXPECT_THROW(RationalScheme::by_name("rk4"), std::invalid_argument);
}

TEST(Grid, Uniform) {
  const auto g = make_uniform_grid(1.0, 4);
  EXPECT_EQ(g.points(), (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(make_uniform_grid(1.0, 1).points(), (std::vector<double>{0, 1}));
  EXPECT_DOUBLE_EQ(g.tau_max(), 0.25);
  EXPECT_THROW(make_uniform_grid(1.0, 0), std::invalid_argument);
  EXPECT_THROW(TimeGrid(1.0, {0.5, 0.4}), std::invalid_argument);
  const auto ng = make_uniform_grid(0.3, 7);
  double s = 0;
  for (double t : ng.steps()) s += t;
  EXPECT_NEAR(s, 0.3, 1e-12);
}

TEST(Step, ScalarExamples) {
  Stepper ie(RationalScheme::implicit_euler(), scalar(1), scalar(2));
  EXPECT_NEAR(ie.step(0.5, Eigen::VectorXd::Ones(1))(0), 0.5, 1e-15);
  Stepper cn(RationalScheme::crank_nicolson(), scalar(1), scalar(2));
  EXPECT_NEAR(cn.step(1.0, Eigen::VectorXd::Ones(1))(0), 0.0, 1e-15);
  EXPECT_NEAR(cn.step(1e-14, Eigen::VectorXd::Ones(1))(0), 1.0, 1e-10);
  EXPECT_NEAR(ie.step(1e-14, Eigen::VectorXd::Ones(1))(0), 1.0, 1e-10);
  EXPECT_THROW(ie.step(0.0, Eigen::VectorXd::Ones(1)), std::invalid_argument);
}

TEST(Evolve, ScalarProductFormulaAndZeroStiffness) {
  const double a = 3.0;
  const auto g = make_uniform_grid(1.0, 10);
  const auto traj = evolve(RationalScheme::implicit_euler(), g, scalar(1), scalar(a), Eigen::VectorXd::Ones(1));
  ASSERT_EQ(traj.size(), 11u);
  EXPECT_NEAR(traj.back().second(0), std::pow(1 + 0.1 * a, -10), 1e-14);
  const auto flat = evolve(RationalScheme::crank_nicolson(), g, scalar(2), scalar(0), Eigen::VectorXd::Constant(1, 4.0));
  for (const auto& [t, u] : flat) EXPECT_EQ(u(0), 4.0);
}

TEST(Evolve, CachesOneFactorizationPerStep) {
  Stepper st(RationalScheme::crank_nicolson(), scalar(1), scalar(1));
  Eigen::VectorXd u = Eigen::VectorXd::Ones(1);
  for (int i = 0; i < 5; ++i) u = st.step(0.1, u);
  u = st.step(0.2, u);
  EXPECT_EQ(st.cached_factorizations(), 2u);
}

TEST(Evolve, HeatAmplitude) {
  const FeSpace s(Mesh::interval(64), 2);
  const auto M = assemble_mass(s).matrix();
  const auto K = assemble_stiffness(s, [](const Point&) { return (2.0 * Eigen::Matrix2d::Identity()).eval(); }).matrix();
  const auto u0 = l2_project(s, [](const Point& x) { return std::sin(pi * x(0)); });
  const auto u = evolve_final(RationalScheme::crank_nicolson(), make_uniform_grid(0.1, 200), M, K, u0);
  EXPECT_NEAR(evaluate(s, u, Point(0.5, 0)), std::exp(-0.2 * pi * pi), 1e-5);
  EXPECT_NEAR(std::exp(-0.2 * pi * pi), 0.1389, 1e-4);
}

TEST(Evolve, ImplicitEulerEnergyDecay) {
  const FeSpace s(Mesh::interval(16), 2);
  const auto M = assemble_mass(s).matrix();
  const auto K = h1_gram(s).matrix();
  Eigen::VectorXd u = l2_project(s, [](const Point& x) { return x(0) * (1 - x(0)) * std::exp(3 * x(0)); });
  for (double tau : {10.0, 1.0, 0.01}) {
    Stepper st(RationalScheme::implicit_euler(), M, K);
    Eigen::VectorXd v = u;
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd w = st.step(tau, v);
      EXPECT_LE(w.dot(M * w), v.dot(M * v) * (1 + 1e-10));
      v = w;
    }
  }
}

TEST(Consistency, LocalOrders) {
  const FeSpace s(Mesh::interval(8), 1);
  const auto M = assemble_mass(s).matrix();
  const auto K = h1_gram(s).matrix();
  const auto u0 = l2_project(s, [](const Point& x) { return std::sin(pi * x(0)); });
  const std::vector<double> taus = {0.02, 0.01, 0.005, 0.0025};
  const auto ie = consistency_probe(RationalScheme::implicit_euler(), M, K, u0, taus);
  EXPECT_NEAR(ie.slope, 2.0, 0.15);
  const auto cn = consistency_probe(RationalScheme::crank_nicolson(), M, K, u0, taus);
  EXPECT_NEAR(cn.slope, 3.0, 0.2);
  const SparseMatrix Z(M.rows(), M.cols());
  const auto ex = consistency_probe(RationalScheme::crank_nicolson(), M, Z, u0, taus);
  EXPECT_TRUE(ex.exact);
}
