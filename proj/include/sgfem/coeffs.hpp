#pragma once

// Random diffusion coefficients M_z(x) and random initial data.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/pce.hpp"
#include "sgfem/polynomial.hpp"
#include "sgfem/spatial.hpp"

namespace sgfem {

/// Scalar factor f(z) of a separable coefficient.
struct RandomFactor {
  std::string name;
  std::function<double(std::span<const double>)> value;
  /// Declared bounds inf f, sup f.
  double lower = 0.0;
  double upper = 0.0;
  /// Total degree in z when f is a polynomial.
  std::optional<int> polynomial_degree;
  /// Optional z-derivatives, keyed by multi-index (used for reporting only).
  DerivativeTable derivatives;
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Polynomial P_i with sigma^(i)(z) = P_i(sigma(z)): P_0 = s, P_{i+1} = P_i'(s) (s - s^2).
inline Polynomial logistic_derivative_polynomial(int i) {
  if (i < 0) throw std::invalid_argument("logistic_derivative_polynomial: negative order");
  Polynomial p = Polynomial::monomial(1);
  const Polynomial s_minus_s2({0.0, 1.0, -1.0});
  for (int k = 0; k < i; ++k) p = p.derivative() * s_minus_s2;
  return p;
}

inline RandomFactor constant_factor(double c) {
  RandomFactor f;
  f.name = "constant";
  f.value = [c](std::span<const double>) { return c; };
  f.lower = f.upper = c;
  f.polynomial_degree = 0;
  return f;
}

/// f(z) = 1 / (1 + e^{-z_j}) + 1 with values in (1, 2); derivatives up to order `max_order` in z_j.
inline RandomFactor logistic_factor(int N = 1, int j = 0, int max_order = 8) {
  if (j < 0 || j >= N) throw std::invalid_argument("logistic_factor: component out of range");
  RandomFactor f;
  f.name = "logistic";
  f.value = [j](std::span<const double> z) { return detail::sigmoid(z[static_cast<std::size_t>(j)]) + 1.0; };
  f.lower = 1.0;
  f.upper = 2.0;
  const MultiIndexSet mis(N, max_order);
  for (const auto& a : mis) {
    int other = total_degree(a) - a[static_cast<std::size_t>(j)];
    const int k = a[static_cast<std::size_t>(j)];
    if (other > 0) {
      f.derivatives[a] = [](std::span<const double>) { return 0.0; };
    } else if (k == 0) {
      f.derivatives[a] = f.value;
    } else {
      const Polynomial p = logistic_derivative_polynomial(k);
      f.derivatives[a] = [p, j](std::span<const double> z) { return p(detail::sigmoid(z[static_cast<std::size_t>(j)])); };
    }
  }
  return f;
}

/// f(z) = c0 + c1 z_j. Unbounded for Normal and Gamma inputs, so not elliptic in
/// general; meant for assembly tests.
inline RandomFactor affine_factor(double c0, double c1, int N = 1, int j = 0) {
  if (j < 0 || j >= N) throw std::invalid_argument("affine_factor: component out of range");
  RandomFactor f;
  f.name = "affine";
  f.value = [c0, c1, j](std::span<const double> z) { return c0 + c1 * z[static_cast<std::size_t>(j)]; };
  f.lower = -std::numeric_limits<double>::infinity();
  f.upper = std::numeric_limits<double>::infinity();
  f.polynomial_degree = 1;
  const MultiIndexSet mis(N, 2);
  for (const auto& a : mis) {
    const int d = total_degree(a);
    if (d == 0) f.derivatives[a] = f.value;
    else if (d == 1 && a[static_cast<std::size_t>(j)] == 1) f.derivatives[a] = [c1](std::span<const double>) { return c1; };
    else f.derivatives[a] = [](std::span<const double>) { return 0.0; };
  }
  return f;
}

/// Deterministic spatial part g(x) with eigenvalue bounds on the domain.
struct SpatialField {
  std::string name;
  SpatialCoefficient eval;
  double lower = 1.0;
  double upper = 1.0;
  /// Polynomial degree in x (drives the element quadrature degree).
  int degree = 0;
};

inline SpatialField identity_field() { return {"identity", identity_coefficient(), 1.0, 1.0, 0}; }

inline SpatialField constant_field(double c) {
  if (!(c > 0)) throw std::invalid_argument("constant_field: value must be positive");
  return {"constant", [c](const Point&) { return (c * Eigen::Matrix2d::Identity()).eval(); }, c, c, 0};
}

/// diag(1 + |x|^2, 3 - |x|^2) on the unit square: eigenvalues within [1, 3].
/// In 1-D only the first entry 1 + x^2 is used, with values in [1, 2].
inline SpatialField anisotropic_field(int dim) {
  SpatialField g;
  g.name = "anisotropic";
  g.eval = [](const Point& x) {
    const double r2 = x.squaredNorm();
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    m(0, 0) = 1.0 + r2;
    m(1, 1) = 3.0 - r2;
    return m;
  };
  g.lower = 1.0;
  g.upper = dim == 1 ? 2.0 : 3.0;
  g.degree = 2;
  return g;
}

/// M_z(x) on a 1-D or 2-D domain with declared bounds kappa <= M <= K.
class CoefficientField {
 public:
  using Eval = std::function<Eigen::Matrix2d(std::span<const double>, const Point&)>;

  CoefficientField(std::string name, int dim, Eval eval, double kappa, double K, bool elliptic,
                   std::optional<int> z_degree, int x_degree)
      : name_(std::move(name)),
        dim_(dim),
        eval_(std::move(eval)),
        kappa_(kappa),
        K_(K),
        elliptic_(elliptic),
        z_degree_(z_degree),
        x_degree_(x_degree) {}

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }
  double K() const { return K_; }
  bool elliptic() const { return elliptic_; }
  std::optional<int> z_degree() const { return z_degree_; }
  int x_degree() const { return x_degree_; }

  Eigen::Matrix2d operator()(std::span<const double> z, const Point& x) const { return eval_(z, x); }

  /// Spatial coefficient for a fixed sample z.
  SpatialCoefficient at(std::span<const double> z) const {
    std::vector<double> zz(z.begin(), z.end());
    return [zz, e = eval_](const Point& x) { return e(zz, x); };
  }

  /// Element quadrature degree making stiffness assembly exact for this field.
  int stiffness_degree(int order) const { return 2 * (order - 1) + x_degree_; }

 private:
  std::string name_;
  int dim_;
  Eval eval_;
  double kappa_;
  double K_;
  bool elliptic_;
  std::optional<int> z_degree_;
  int x_degree_;
};

/// M_z(x) = f(z) g(x), kappa = inf f inf g, K = sup f sup g. Factors that are
/// not bounded below by a positive number are rejected unless explicitly allowed
/// (the field is then flagged non-elliptic).
inline CoefficientField builtin_separable(const RandomFactor& f, const SpatialField& g, int dim,
                                          bool allow_non_elliptic = false) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("builtin_separable: dim must be 1 or 2");
  const bool elliptic = f.lower > 0.0 && std::isfinite(f.upper);
  if (!elliptic && !allow_non_elliptic)
    throw std::invalid_argument("builtin_separable: factor '" + f.name + "' is not bounded below by a positive constant");
  auto eval = [fv = f.value, gv = g.eval](std::span<const double> z, const Point& x) {
    return (fv(z) * gv(x)).eval();
  };
  return CoefficientField(f.name + "*" + g.name, dim, eval, elliptic ? f.lower * g.lower : 0.0,
                          elliptic ? f.upper * g.upper : std::numeric_limits<double>::infinity(), elliptic,
                          f.polynomial_degree, g.degree);
}

struct BoundsViolation {
  std::vector<double> z;
  Point x;
  double min_eig;
  double max_eig;
};

struct BoundsReport {
  std::size_t samples = 0;
  double observed_min = std::numeric_limits<double>::infinity();
  double observed_max = -std::numeric_limits<double>::infinity();
  std::vector<BoundsViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks kappa - 1e-10 <= eig(M_z(x)) <= K + 1e-10 on all sample pairs.
inline BoundsReport eval_bounds_check(const CoefficientField& field, const std::vector<std::vector<double>>& z_samples,
                                      const std::vector<Point>& x_samples, double tol = 1e-10) {
  if (z_samples.empty() || x_samples.empty()) throw std::invalid_argument("eval_bounds_check: empty sample set");
  BoundsReport r;
  for (const auto& z : z_samples)
    for (const auto& x : x_samples) {
      const Eigen::Matrix2d m = field(z, x);
      double lo, hi;
      if (field.dim() == 1) {
        lo = hi = m(0, 0);
      } else {
        const Eigen::Matrix2d s = 0.5 * (m + m.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s, Eigen::EigenvaluesOnly);
        lo = es.eigenvalues()(0);
        hi = es.eigenvalues()(1);
      }
      ++r.samples;
      r.observed_min = std::min(r.observed_min, lo);
      r.observed_max = std::max(r.observed_max, hi);
      if (lo < field.kappa() - tol || hi > field.K() + tol) r.violations.push_back({z, x, lo, hi});
    }
  return r;
}

/// u0(z, x). `sine_coeffs` is set for deterministic 1-D data sum_j c_j sin(j pi x),
/// which admits the closed-form reference solution.
struct InitialDatum {
  std::string name;
  std::function<double(std::span<const double>, const Point&)> eval;
  bool deterministic = true;
  std::vector<double> sine_coeffs;
  /// Declared smoothness class, reported as metadata only.
  std::string smoothness = "smooth";

  SpatialFunction at(std::span<const double> z) const {
    std::vector<double> zz(z.begin(), z.end());
    return [zz, e = eval](const Point& x) { return e(zz, x); };
  }
};

/// sum_j c_j sin(j pi x) on (0, 1); c_j multiplies sin((j + 1) pi x).
inline InitialDatum sine_series(std::vector<double> coeffs) {
  InitialDatum d;
  d.name = "sine_series";
  d.sine_coeffs = coeffs;
  d.eval = [c = std::move(coeffs)](std::span<const double>, const Point& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += c[j] * std::sin(static_cast<double>(j + 1) * std::numbers::pi * x(0));
    return s;
  };
  return d;
}

/// sin(pi x) sin(pi y) on the unit square.
inline InitialDatum sine_product_2d() {
  InitialDatum d;
  d.name = "sine_product";
  d.eval = [](std::span<const double>, const Point& x) { return std::sin(std::numbers::pi * x(0)) * std::sin(std::numbers::pi * x(1)); };
  return d;
}

/// g(z) u(x).
inline InitialDatum separable_datum(std::function<double(std::span<const double>)> g, InitialDatum u) {
  InitialDatum d;
  d.name = "separable(" + u.name + ")";
  d.deterministic = false;
  d.eval = [g = std::move(g), e = u.eval](std::span<const double> z, const Point& x) { return g(z) * e(z, x); };
  return d;
}

/// Parameters of a named built-in, e.g. {"c0": 1, "c1": 0.5}.
using NamedParams = std::map<std::string, double>;

inline double param_or(const NamedParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

/// Random factors by name: "constant" (value), "logistic" (component), "affine" (c0, c1, component).
inline RandomFactor random_factor_by_name(const std::string& name, int N, const NamedParams& p = {}) {
  const int j = static_cast<int>(param_or(p, "component", 0));
  if (name == "constant") return constant_factor(param_or(p, "value", 1.0));
  if (name == "logistic") return logistic_factor(N, j);
  if (name == "affine") return affine_factor(param_or(p, "c0", 1.0), param_or(p, "c1", 0.5), N, j);
  throw std::invalid_argument("unknown random factor '" + name + "'");
}

/// Spatial fields by name: "identity", "constant" (value), "anisotropic".
inline SpatialField spatial_field_by_name(const std::string& name, int dim, const NamedParams& p = {}) {
  if (name == "identity") return identity_field();
  if (name == "constant") return constant_field(param_or(p, "value", 1.0));
  if (name == "anisotropic") return anisotropic_field(dim);
  throw std::invalid_argument("unknown spatial field '" + name + "'");
}

/// Initial data by name: "sine" (1-D sin(pi x)), "sine_series" (1-D, coefficients
/// c1, c2, ...), "sine_product" (2-D).
inline InitialDatum initial_datum_by_name(const std::string& name, const NamedParams& p = {}) {
  if (name == "sine") return sine_series({1.0});
  if (name == "sine_series") {
    std::vector<double> c;
    for (int j = 1; p.count("c" + std::to_string(j)); ++j) c.push_back(p.at("c" + std::to_string(j)));
    if (c.empty()) throw std::invalid_argument("sine_series: no coefficients c1, c2, ... given");
    return sine_series(c);
  }
  if (name == "sine_product") return sine_product_2d();
  throw std::invalid_argument("unknown initial datum '" + name + "'");
}

}  // namespace sgfem
