#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "sgfem/orthopoly.hpp"

using namespace sgfem;

namespace {

std::vector<PolyFamily> sample_families() {
  return {PolyFamily::hermite(),          PolyFamily::jacobi(0, 0),       PolyFamily::jacobi(1, 2),
          PolyFamily::jacobi(-0.5, -0.5), PolyFamily::jacobi(2.0, 0.5),   PolyFamily::laguerre(0),
          PolyFamily::laguerre(1.5),      PolyFamily::laguerre(-0.5)};
}

// Closed-form moments E[z^k], k = 0..K, from the moment recursions of each
// measure (integration by parts against the weight), in long double.
std::vector<long double> exact_moments(const PolyFamily& f, int K) {
  std::vector<long double> m(static_cast<std::size_t>(K) + 1, 0.0L);
  m[0] = 1.0L;
  const long double a = f.alpha(), b = f.beta();
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<long double>(k);
    const long double prev = k > 0 ? m[static_cast<std::size_t>(k) - 1] : 0.0L;
    switch (f.kind()) {
      case FamilyKind::Hermite: m[static_cast<std::size_t>(k) + 1] = kk * prev; break;
      case FamilyKind::Laguerre: m[static_cast<std::size_t>(k) + 1] = (a + kk + 1) * m[static_cast<std::size_t>(k)]; break;
      case FamilyKind::Jacobi:
        m[static_cast<std::size_t>(k) + 1] = ((b - a) * m[static_cast<std::size_t>(k)] + kk * prev) / (a + b + 2 + kk);
        break;
    }
  }
  return m;
}

double inner(const QuadratureRule& r, const Polynomial& p, const Polynomial& q) {
  return r.integrate([&](double z) { return p(z) * q(z); });
}

// Weighted norm sum_{i<=k} ||rho^{i/2} p^(i)||^2, exact by Gauss quadrature.
double poly_sobolev_norm(const PolyFamily& f, const Polynomial& p, int k) {
  const auto r = gauss_rule(f, 2 * std::max(p.degree(), 0) + 4);
  double acc = 0.0;
  Polynomial d = p;
  for (int i = 0; i <= k; ++i) {
    acc += r.integrate([&](double z) { return std::pow(f.sobolev_weight(z), i) * d(z) * d(z); });
    d = d.derivative();
  }
  return std::sqrt(acc);
}

}  // namespace

TEST(Family, RejectsInvalidParameters) {
  EXPECT_THROW(PolyFamily::jacobi(-1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(PolyFamily::jacobi(0.0, -1.5), std::invalid_argument);
  EXPECT_THROW(PolyFamily::laguerre(-1.0), std::invalid_argument);
  EXPECT_NO_THROW(PolyFamily::laguerre(-0.99));
}

TEST(Recurrence, HermiteCoefficients) {
  const auto rc = recurrence_coeffs(PolyFamily::hermite(), 2);
  ASSERT_EQ(rc.size(), 3u);
  for (int k = 0; k <= 2; ++k) {
    EXPECT_DOUBLE_EQ(rc[static_cast<std::size_t>(k)].a, 0.0);
    EXPECT_DOUBLE_EQ(rc[static_cast<std::size_t>(k)].b, std::sqrt(k));
  }
}

TEST(Recurrence, LegendreAndLaguerreFirstDegree) {
  const auto h1 = orthonormal_polynomial(PolyFamily::jacobi(0, 0), 1);
  EXPECT_NEAR(h1.coeff(0), 0.0, 1e-15);
  EXPECT_NEAR(h1.coeff(1), std::sqrt(3.0), 1e-15);
  const auto l1 = orthonormal_polynomial(PolyFamily::laguerre(0), 1);
  // 1 - z up to sign.
  EXPECT_NEAR(std::abs(l1.coeff(0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(l1.coeff(1)), 1.0, 1e-15);
  EXPECT_LT(l1.coeff(0) * l1.coeff(1), 0.0);
}

TEST(Eval, Examples) {
  const auto h = eval_orthonormal(PolyFamily::hermite(), 2, 0.0);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_DOUBLE_EQ(h[0], 1.0);
  EXPECT_DOUBLE_EQ(h[1], 0.0);
  EXPECT_NEAR(h[2], -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(eval_orthonormal(PolyFamily::hermite(), 0, 3.7), std::vector<double>{1.0});
  const auto p = eval_orthonormal(PolyFamily::jacobi(0, 0), 1, 1.0);
  EXPECT_NEAR(p[1], std::sqrt(3.0), 1e-15);
}

TEST(Eval, AgreesWithMonomialForm) {
  for (const auto& f : sample_families())
    for (double z : {-0.7, 0.1, 0.9, 2.5}) {
      const auto h = eval_orthonormal(f, 8, z);
      for (int k = 0; k <= 8; ++k) {
        const double v = orthonormal_polynomial(f, k)(z);
        EXPECT_NEAR(h[static_cast<std::size_t>(k)], v, 1e-9 * (1 + std::abs(v))) << f.name() << " k=" << k;
      }
    }
}

TEST(Gauss, HermiteSmallRules) {
  const auto r2 = gauss_rule(PolyFamily::hermite(), 2);
  EXPECT_NEAR(r2.nodes[0], -1.0, 1e-15);
  EXPECT_NEAR(r2.nodes[1], 1.0, 1e-15);
  EXPECT_NEAR(r2.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(r2.weights[1], 0.5, 1e-15);
  const auto r3 = gauss_rule(PolyFamily::hermite(), 3);
  EXPECT_NEAR(r3.nodes[0], -std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(r3.nodes[1], 0.0, 1e-15);
  EXPECT_NEAR(r3.nodes[2], std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(r3.weights[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(r3.weights[1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(r3.weights[2], 1.0 / 6, 1e-15);
}

TEST(Gauss, SingleNodeIsMean) {
  for (const auto& f : sample_families()) {
    const auto r = gauss_rule(f, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r.nodes[0], static_cast<double>(exact_moments(f, 1)[1]), 1e-15);
    EXPECT_DOUBLE_EQ(r.weights[0], 1.0);
  }
}

TEST(Gauss, WeightsSumToOneAndMomentsExact) {
  for (const auto& f : sample_families())
    for (int q = 1; q <= 20; ++q) {
      const auto r = gauss_rule(f, q);
      double s = 0.0;
      for (double w : r.weights) {
        EXPECT_GT(w, 0.0);
        s += w;
      }
      EXPECT_NEAR(s, 1.0, 1e-13);
      const auto m = exact_moments(f, 2 * q - 1);
      for (int k = 0; k <= 2 * q - 1; ++k) {
        long double qv = 0, qa = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
          const long double t = r.weights[i] * std::pow(static_cast<long double>(r.nodes[i]), k);
          qv += t;
          qa += std::abs(t);
        }
        const long double scale = std::max({std::abs(m[static_cast<std::size_t>(k)]), qa, 1e-300L});
        EXPECT_LE(std::abs(qv - m[static_cast<std::size_t>(k)]) / scale, 1e-10L)
            << f.name() << " q=" << q << " k=" << k;
      }
    }
}

TEST(Gauss, Orthonormality) {
  for (const auto& f : sample_families()) {
    const auto r = gauss_rule(f, 9);
    for (int j = 0; j <= 8; ++j)
      for (int k = 0; k <= 8; ++k) {
        const double g = r.integrate([&](double z) {
          const auto h = eval_orthonormal(f, 8, z);
          return h[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(k)];
        });
        EXPECT_NEAR(g, j == k ? 1.0 : 0.0, 1e-10) << f.name() << " " << j << "," << k;
      }
  }
}

TEST(Q, LowDegreeExamples) {
  const Polynomial h2({-1.0, 0.0, 1.0});
  const auto qh2 = apply_Q(PolyFamily::hermite(), h2);
  EXPECT_EQ(qh2.coeffs(), (2.0 * h2).coeffs());
  EXPECT_TRUE(apply_Q(PolyFamily::jacobi(0, 0), Polynomial::constant(1.0)).is_zero());
  const Polynomial l1({1.0, -1.0});
  EXPECT_EQ(apply_Q(PolyFamily::laguerre(0), l1).coeffs(), l1.coeffs());
  EXPECT_DOUBLE_EQ(sl_eigenvalue(PolyFamily::hermite(), 5), 5.0);
  EXPECT_DOUBLE_EQ(sl_eigenvalue(PolyFamily::jacobi(1, 2), 3), 21.0);
  for (const auto& f : sample_families()) EXPECT_DOUBLE_EQ(sl_eigenvalue(f, 0), 0.0);
}

TEST(Q, Eigenrelation) {
  for (const auto& f : sample_families())
    for (int k = 0; k <= 8; ++k) {
      const auto h = orthonormal_polynomial(f, k);
      const auto lhs = apply_Q(f, h);
      const auto rhs = sl_eigenvalue(f, k) * h;
      const double scale = std::max(1.0, rhs.max_abs_coeff());
      for (int i = 0; i <= k; ++i) EXPECT_NEAR(lhs.coeff(i), rhs.coeff(i), 1e-10 * scale) << f.name() << " k=" << k;
      EXPECT_LE(lhs.degree(), k);
    }
}

TEST(Q, Symmetric) {
  const std::vector<Polynomial> ps = {Polynomial({1.0, -2.0, 0.5}), Polynomial({0.3, 0.0, 1.0, -0.25, 0.1}),
                                      Polynomial({-1.0, 0.5, 0.0, 0.0, 0.2, 0.0, -0.05})};
  for (const auto& f : sample_families()) {
    const auto r = gauss_rule(f, 10);
    for (const auto& p : ps)
      for (const auto& q : ps) {
        const double a = inner(r, apply_Q(f, p), q);
        const double b = inner(r, p, apply_Q(f, q));
        EXPECT_NEAR(a, b, 1e-9 * (1 + std::abs(a))) << f.name();
      }
  }
}

TEST(Q, OperatorNormBounds) {
  const std::vector<Polynomial> ps = {Polynomial({0.0, 1.0}), Polynomial({1.0, -2.0, 0.5}),
                                      Polynomial({0.3, 0.0, 1.0, -0.25, 0.1}),
                                      Polynomial({-1.0, 0.5, 0.0, 0.0, 0.2, 0.0, -0.05}),
                                      orthonormal_polynomial(PolyFamily::hermite(), 6)};
  for (const auto& f : sample_families())
    for (int l : {0, 1})
      for (const auto& p : ps) {
        const double lhs = poly_sobolev_norm(f, apply_Q(f, p), l);
        const double rhs = sl_operator_bound(f, l) * poly_sobolev_norm(f, p, l + 2);
        EXPECT_LE(lhs, rhs) << f.name() << " l=" << l;
      }
}

TEST(Q, BoundConstants) {
  EXPECT_DOUBLE_EQ(sl_operator_bound(PolyFamily::hermite(), 0), std::sqrt(21.0));
  EXPECT_DOUBLE_EQ(sl_operator_bound(PolyFamily::laguerre(0), 1), std::sqrt(87.0 + 24 + 3));
  EXPECT_DOUBLE_EQ(sl_operator_bound(PolyFamily::jacobi(0, 0), 0), std::sqrt(3.0 * (1 + 4)));
}
