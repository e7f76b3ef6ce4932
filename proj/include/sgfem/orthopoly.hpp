#pragma once

// One-dimensional orthonormal polynomial families (Hermite, Jacobi, Laguerre),
// their Gauss rules, and the Sturm-Liouville operators having them as
// eigenfunctions.
//
// Conventions: every family is normalized against a probability measure.
//   Hermite          standard normal density
//   Jacobi(a, b)     c * (1-z)^a (1+z)^b on (-1, 1)
//   Laguerre(a)      z^a e^{-z} / Gamma(a+1) on (0, inf)   (Gamma law, rate 1)
// The orthonormal h_k have positive leading coefficient. For Laguerre this
// differs from the Rodrigues normalization by the sign (-1)^k.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/errors.hpp"
#include "sgfem/polynomial.hpp"

namespace sgfem {

enum class FamilyKind { Hermite, Jacobi, Laguerre };

class PolyFamily {
 public:
  static PolyFamily hermite() { return PolyFamily(FamilyKind::Hermite, 0.0, 0.0); }

  static PolyFamily jacobi(double alpha, double beta) {
    if (!(alpha > -1.0) || !(beta > -1.0))
      throw std::invalid_argument("Jacobi family requires alpha, beta > -1");
    return PolyFamily(FamilyKind::Jacobi, alpha, beta);
  }

  static PolyFamily laguerre(double alpha) {
    if (!(alpha > -1.0)) throw std::invalid_argument("Laguerre family requires alpha > -1");
    return PolyFamily(FamilyKind::Laguerre, alpha, 0.0);
  }

  FamilyKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  std::string name() const {
    switch (kind_) {
      case FamilyKind::Hermite: return "hermite";
      case FamilyKind::Jacobi: return "jacobi";
      case FamilyKind::Laguerre: return "laguerre";
    }
    return "unknown";
  }

  /// Weight rho of the weighted Sobolev norms: z for the Gamma law, 1 otherwise.
  double sobolev_weight(double z) const { return kind_ == FamilyKind::Laguerre ? z : 1.0; }

  friend bool operator==(const PolyFamily&, const PolyFamily&) = default;

 private:
  PolyFamily(FamilyKind kind, double alpha, double beta) : kind_(kind), alpha_(alpha), beta_(beta) {}

  FamilyKind kind_;
  double alpha_;
  double beta_;
};

/// z h_k = b_{k+1} h_{k+1} + a_k h_k + b_k h_{k-1}; b_0 = 0.
struct Recurrence {
  double a;
  double b;
};

inline Recurrence recurrence_coeff(const PolyFamily& family, int k) {
  if (k < 0) throw std::invalid_argument("recurrence_coeff: k must be >= 0");
  const double kk = k;
  switch (family.kind()) {
    case FamilyKind::Hermite:
      return {0.0, std::sqrt(kk)};
    case FamilyKind::Laguerre: {
      const double al = family.alpha();
      return {2.0 * kk + al + 1.0, std::sqrt(kk * (kk + al))};
    }
    case FamilyKind::Jacobi: {
      const double al = family.alpha();
      const double be = family.beta();
      const double s = al + be;
      double a;
      if (k == 0)
        a = (be - al) / (s + 2.0);
      else
        a = (be * be - al * al) / ((2.0 * kk + s) * (2.0 * kk + s + 2.0));
      double b2;
      if (k == 0)
        b2 = 0.0;
      else if (k == 1)
        b2 = 4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s) * (2.0 + s) * (3.0 + s));
      else
        b2 = 4.0 * kk * (kk + al) * (kk + be) * (kk + s) /
             ((2.0 * kk + s) * (2.0 * kk + s) * (2.0 * kk + s + 1.0) * (2.0 * kk + s - 1.0));
      return {a, std::sqrt(b2)};
    }
  }
  return {0.0, 0.0};
}

/// Recurrence pairs (a_k, b_k) for k = 0..k_max.
inline std::vector<Recurrence> recurrence_coeffs(const PolyFamily& family, int k_max) {
  if (k_max < 0) throw std::invalid_argument("recurrence_coeffs: k_max must be >= 0");
  std::vector<Recurrence> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) out.push_back(recurrence_coeff(family, k));
  return out;
}

/// (h_0(z), ..., h_n(z)) by forward recurrence.
inline std::vector<double> eval_orthonormal(const PolyFamily& family, int n, double z) {
  if (n < 0) throw std::invalid_argument("eval_orthonormal: n must be >= 0");
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  h[0] = 1.0;
  if (n == 0) return h;
  const Recurrence r0 = recurrence_coeff(family, 0);
  const Recurrence r1 = recurrence_coeff(family, 1);
  h[1] = (z - r0.a) / r1.b;
  for (int k = 1; k < n; ++k) {
    const Recurrence rk = recurrence_coeff(family, k);
    const Recurrence rk1 = recurrence_coeff(family, k + 1);
    h[static_cast<std::size_t>(k) + 1] =
        ((z - rk.a) * h[static_cast<std::size_t>(k)] - rk.b * h[static_cast<std::size_t>(k) - 1]) / rk1.b;
  }
  return h;
}

/// h_k as monomial coefficients.
inline Polynomial orthonormal_polynomial(const PolyFamily& family, int k) {
  if (k < 0 || k > Polynomial::max_degree)
    throw std::invalid_argument("orthonormal_polynomial: degree out of range");
  Polynomial prev;  // h_{-1} = 0
  Polynomial cur = Polynomial::constant(1.0);
  const Polynomial z = Polynomial::monomial(1);
  for (int j = 0; j < k; ++j) {
    const Recurrence rj = recurrence_coeff(family, j);
    const Recurrence rj1 = recurrence_coeff(family, j + 1);
    Polynomial next = (1.0 / rj1.b) * ((z * cur) - rj.a * cur - rj.b * prev);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// q-node Gauss rule for the family's probability measure.
///
/// Nodes are eigenvalues of the symmetric tridiagonal recurrence matrix, then
/// polished by Newton steps on h_q. Weights are the Christoffel numbers
/// 1 / sum_{k<q} h_k(z_i)^2, which keep full relative accuracy for the tiny
/// weights far out in the tails.
inline QuadratureRule gauss_rule(const PolyFamily& family, int q) {
  if (q < 1) throw std::invalid_argument("gauss_rule: q must be >= 1");
  const auto rec = recurrence_coeffs(family, q);
  Eigen::VectorXd diag(q);
  Eigen::VectorXd sub(std::max(q - 1, 1));
  for (int k = 0; k < q; ++k) diag(k) = rec[static_cast<std::size_t>(k)].a;
  for (int k = 1; k < q; ++k) sub(k - 1) = rec[static_cast<std::size_t>(k)].b;

  std::vector<double> nodes(static_cast<std::size_t>(q));
  if (q == 1) {
    nodes[0] = diag(0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub.head(q - 1), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("gauss_rule: tridiagonal eigen-solve failed");
    for (int i = 0; i < q; ++i) nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
  }

  // h_q and h_q' by recurrence for Newton polishing.
  auto value_and_slope = [&](double z) {
    double hm = 0.0, h = 1.0, dm = 0.0, d = 0.0;
    for (int k = 0; k < q; ++k) {
      const double a = rec[static_cast<std::size_t>(k)].a;
      const double bk = rec[static_cast<std::size_t>(k)].b;
      const double bk1 = rec[static_cast<std::size_t>(k) + 1].b;
      const double hn = ((z - a) * h - bk * hm) / bk1;
      const double dn = ((z - a) * d + h - bk * dm) / bk1;
      hm = h;
      h = hn;
      dm = d;
      d = dn;
    }
    return std::pair{h, d};
  };
  for (double& z : nodes) {
    for (int it = 0; it < 3; ++it) {
      const auto [v, dv] = value_and_slope(z);
      if (dv == 0.0 || !std::isfinite(v) || !std::isfinite(dv)) break;
      const double step = v / dv;
      if (!(std::abs(step) <= 1e-6 * (1.0 + std::abs(z)))) break;
      z -= step;
      if (std::abs(step) <= 1e-17 * (1.0 + std::abs(z))) break;
    }
  }

  QuadratureRule rule;
  rule.nodes = nodes;
  rule.weights.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto h = eval_orthonormal(family, q - 1, nodes[i]);
    double s = 0.0;
    for (double v : h) s += v * v;
    rule.weights[i] = 1.0 / s;
    if (!std::isfinite(rule.weights[i]) || rule.weights[i] < 0.0)
      throw NumericalError("gauss_rule: non-finite weight");
  }
  return rule;
}

/// Sturm-Liouville operator Q of the family applied exactly to p.
///   Hermite   Q = -d^2 + z d
///   Jacobi    Q = -(1 - z^2) d^2 + (a - b + (a + b + 2) z) d
///   Laguerre  Q = -z d^2 + (z - a - 1) d
inline Polynomial apply_Q(const PolyFamily& family, const Polynomial& p) {
  const Polynomial d1 = p.derivative();
  const Polynomial d2 = d1.derivative();
  const Polynomial z = Polynomial::monomial(1);
  switch (family.kind()) {
    case FamilyKind::Hermite:
      return (z * d1) - d2;
    case FamilyKind::Jacobi: {
      const double a = family.alpha(), b = family.beta();
      const Polynomial one_minus_z2({1.0, 0.0, -1.0});
      const Polynomial drift({a - b, a + b + 2.0});
      return (drift * d1) - (one_minus_z2 * d2);
    }
    case FamilyKind::Laguerre: {
      const Polynomial drift({-family.alpha() - 1.0, 1.0});
      return (drift * d1) - (z * d2);
    }
  }
  return {};
}

inline double sl_eigenvalue(const PolyFamily& family, int k) {
  if (k < 0) throw std::invalid_argument("sl_eigenvalue: k must be >= 0");
  const double kk = k;
  if (family.kind() == FamilyKind::Jacobi) return kk * (kk + family.alpha() + family.beta() + 1.0);
  return kk;
}

/// Constant C(l) with ||Q f||_{H^l_rho} <= C(l) ||f||_{H^{l+2}_rho}.
inline double sl_operator_bound(const PolyFamily& family, int l) {
  if (l < 0) throw std::invalid_argument("sl_operator_bound: l must be >= 0");
  const double ll = l;
  switch (family.kind()) {
    case FamilyKind::Hermite:
      return std::sqrt(21.0 + 3.0 * ll * ll);
    case FamilyKind::Laguerre:
      return std::sqrt(24.0 * family.alpha() + 87.0 + 24.0 * ll + 3.0 * ll * ll);
    case FamilyKind::Jacobi: {
      const double a = family.alpha(), b = family.beta();
      const double t = ll + 1.0 + std::max(a, b);
      const double u = ll * (ll + a + b + 1.0);
      return std::sqrt(3.0 * (1.0 + 4.0 * t * t + u * u));
    }
  }
  return 0.0;
}

}  // namespace sgfem
