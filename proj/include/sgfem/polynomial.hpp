#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgfem {

/// Real polynomial in the monomial basis, coeffs()[k] multiplies z^k.
///
/// The representation is exact for the differential operators applied to it
/// (derivatives, multiplication by low-degree polynomials), which is what the
/// Sturm-Liouville checks need. Degrees above max_degree are rejected.
class Polynomial {
 public:
  static constexpr int max_degree = 64;

  Polynomial() = default;

  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    trim();
    if (degree() > max_degree)
      throw std::invalid_argument("Polynomial: degree " + std::to_string(degree()) +
                                  " exceeds cap of " + std::to_string(max_degree));
  }

  static Polynomial constant(double c) { return Polynomial({c}); }

  static Polynomial monomial(int k, double c = 1.0) {
    if (k < 0) throw std::invalid_argument("Polynomial::monomial: negative power");
    std::vector<double> v(static_cast<std::size_t>(k) + 1, 0.0);
    v.back() = c;
    return Polynomial(std::move(v));
  }

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }

  const std::vector<double>& coeffs() const { return coeffs_; }

  double coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[static_cast<std::size_t>(k)] : 0.0;
  }

  double operator()(double z) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

  Polynomial derivative(int order) const {
    Polynomial p = *this;
    for (int i = 0; i < order; ++i) p = p.derivative();
    return p;
  }

  /// Largest coefficient magnitude; used for relative comparisons.
  double max_abs_coeff() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k) r[k] += a.coeffs_[k];
    for (std::size_t k = 0; k < b.coeffs_.size(); ++k) r[k] += b.coeffs_[k];
    return Polynomial(std::move(r));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

  friend Polynomial operator*(double s, const Polynomial& p) {
    std::vector<double> r = p.coeffs_;
    for (double& c : r) c *= s;
    return Polynomial(std::move(r));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> r(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) r[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(r));
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  std::vector<double> coeffs_;
};

}  // namespace sgfem
