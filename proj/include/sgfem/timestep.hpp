#pragma once

// Rational one-step schemes F(tau) = r(-tau A) written in weak form with a mass
// matrix: (d0 M - d1 tau K) u+ = (n0 M - n1 tau K) u for r(z) = (n0 + n1 z) / (d0 + d1 z).

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/linalg.hpp"

namespace sgfem {

enum class SchemeKind { ImplicitEuler, CrankNicolson };

class RationalScheme {
 public:
  static RationalScheme implicit_euler() { return {SchemeKind::ImplicitEuler, 1.0, 0.0, 1.0, -1.0, 1}; }
  static RationalScheme crank_nicolson() { return {SchemeKind::CrankNicolson, 1.0, 0.5, 1.0, -0.5, 2}; }

  static RationalScheme by_name(const std::string& name) {
    if (name == "implicit_euler") return implicit_euler();
    if (name == "crank_nicolson") return crank_nicolson();
    throw std::invalid_argument("unknown scheme '" + name + "'");
  }

  SchemeKind kind() const { return kind_; }
  std::string name() const { return kind_ == SchemeKind::ImplicitEuler ? "implicit_euler" : "crank_nicolson"; }
  /// Classical order p_t.
  int order() const { return order_; }
  double num0() const { return n0_; }
  double num1() const { return n1_; }
  double den0() const { return d0_; }
  double den1() const { return d1_; }

  std::complex<double> r(std::complex<double> z) const { return (n0_ + n1_ * z) / (d0_ + d1_ * z); }

  struct StabilityProbe {
    double max_abs_boundary = 0.0;  // sup |r| over sampled Re z = 0
    double max_abs_interior = 0.0;  // sup |r| over sampled Re z < 0
    bool a_stable = false;
  };

  /// Samples |r| on 200 points of the imaginary axis and 200 points of the open
  /// left half-plane (logarithmically spread radii, all angles).
  StabilityProbe a_stability_probe() const {
    StabilityProbe p;
    bool strict = true;
    for (int i = 0; i < 200; ++i) {
      const double y = std::pow(10.0, -6.0 + 12.0 * i / 199.0) * (i % 2 ? 1.0 : -1.0);
      p.max_abs_boundary = std::max(p.max_abs_boundary, std::abs(r({0.0, y})));
      const double rad = std::pow(10.0, -4.0 + 8.0 * i / 199.0);
      const double ang = std::numbers::pi / 2 + std::numbers::pi * (i + 0.5) / 200.0;
      const double v = std::abs(r(std::polar(rad, ang)));
      p.max_abs_interior = std::max(p.max_abs_interior, v);
      if (!(v < 1.0)) strict = false;
    }
    p.a_stable = p.max_abs_boundary <= 1.0 + 1e-12 && p.max_abs_interior <= 1.0 + 1e-12 && strict;
    return p;
  }

 private:
  RationalScheme(SchemeKind k, double n0, double n1, double d0, double d1, int order)
      : kind_(k), n0_(n0), n1_(n1), d0_(d0), d1_(d1), order_(order) {}

  SchemeKind kind_;
  double n0_, n1_, d0_, d1_;
  int order_;
};

class TimeGrid {
 public:
  TimeGrid(double T_bar, std::vector<double> steps) : T_(T_bar), steps_(std::move(steps)) {
    if (!(T_bar > 0)) throw std::invalid_argument("TimeGrid: T_bar must be positive");
    if (steps_.empty()) throw std::invalid_argument("TimeGrid: need at least one step");
    double s = 0.0;
    points_.push_back(0.0);
    for (double t : steps_) {
      if (!(t > 0)) throw std::invalid_argument("TimeGrid: steps must be positive");
      s += t;
      points_.push_back(s);
    }
    if (std::abs(s - T_bar) > 1e-12 * std::max(1.0, T_bar)) throw std::invalid_argument("TimeGrid: steps do not sum to T_bar");
    points_.back() = T_bar;
  }

  double final_time() const { return T_; }
  const std::vector<double>& steps() const { return steps_; }
  const std::vector<double>& points() const { return points_; }
  std::size_t num_steps() const { return steps_.size(); }
  double tau_max() const { return *std::max_element(steps_.begin(), steps_.end()); }

 private:
  double T_;
  std::vector<double> steps_;
  std::vector<double> points_;
};

inline TimeGrid make_uniform_grid(double T_bar, int N_k) {
  if (N_k < 1) throw std::invalid_argument("make_uniform_grid: N_k must be >= 1");
  if (!(T_bar > 0)) throw std::invalid_argument("make_uniform_grid: T_bar must be positive");
  TimeGrid g(T_bar, std::vector<double>(static_cast<std::size_t>(N_k), T_bar / N_k));
  return g;
}

/// Applies F(tau) for a fixed pencil (M, K); one factorization per distinct tau.
class Stepper {
 public:
  Stepper(RationalScheme scheme, SparseMatrix M, SparseMatrix K)
      : scheme_(scheme), M_(std::move(M)), K_(std::move(K)) {
    if (M_.rows() != K_.rows() || M_.rows() != M_.cols() || K_.rows() != K_.cols())
      throw std::invalid_argument("Stepper: mass and stiffness must be square of equal size");
  }

  const RationalScheme& scheme() const { return scheme_; }

  Eigen::VectorXd step(double tau, const Eigen::VectorXd& u) {
    if (!(tau > 0)) throw std::invalid_argument("Stepper: tau must be positive");
    auto& e = entry(tau);
    return e.solver->solve(e.rhs * u);
  }

  std::size_t cached_factorizations() const { return cache_.size(); }

 private:
  struct Entry {
    std::unique_ptr<SymmetricSolver> solver;
    SparseMatrix rhs;
  };

  Entry& entry(double tau) {
    auto it = cache_.find(tau);
    if (it != cache_.end()) return it->second;
    Entry e;
    const SparseMatrix lhs = scheme_.den0() * M_ - (scheme_.den1() * tau) * K_;
    e.solver = std::make_unique<SymmetricSolver>(lhs);
    e.rhs = scheme_.num0() * M_ - (scheme_.num1() * tau) * K_;
    return cache_.emplace(tau, std::move(e)).first->second;
  }

  RationalScheme scheme_;
  SparseMatrix M_, K_;
  std::map<double, Entry> cache_;
};

/// States at every grid point, starting with u0 at t = 0.
inline std::vector<std::pair<double, Eigen::VectorXd>> evolve(const RationalScheme& scheme, const TimeGrid& grid,
                                                               const SparseMatrix& M, const SparseMatrix& K,
                                                               const Eigen::VectorXd& u0) {
  Stepper st(scheme, M, K);
  std::vector<std::pair<double, Eigen::VectorXd>> out;
  out.reserve(grid.num_steps() + 1);
  out.emplace_back(0.0, u0);
  Eigen::VectorXd u = u0;
  for (std::size_t i = 0; i < grid.num_steps(); ++i) {
    u = st.step(grid.steps()[i], u);
    out.emplace_back(grid.points()[i + 1], u);
  }
  return out;
}

/// Final state only.
inline Eigen::VectorXd evolve_final(const RationalScheme& scheme, const TimeGrid& grid, const SparseMatrix& M,
                                    const SparseMatrix& K, const Eigen::VectorXd& u0) {
  Stepper st(scheme, M, K);
  Eigen::VectorXd u = u0;
  for (double tau : grid.steps()) u = st.step(tau, u);
  return u;
}

/// Exact propagator exp(-t M^{-1} K) via the generalized eigen-decomposition
/// K V = M V diag(lambda), V^T M V = I (dense, small systems).
class ExactPropagator {
 public:
  ExactPropagator(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K) : M_(M) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() != Eigen::Success) throw NumericalError("ExactPropagator: eigen-solve failed");
    lambda_ = es.eigenvalues();
    V_ = es.eigenvectors();
  }

  Eigen::VectorXd apply(double t, const Eigen::VectorXd& u) const {
    const Eigen::VectorXd c = V_.transpose() * (M_ * u);
    return V_ * (c.array() * (-t * lambda_.array()).exp()).matrix();
  }

 private:
  Eigen::MatrixXd M_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd V_;
};

struct ConsistencyProbe {
  std::vector<double> taus;
  std::vector<double> errors;  // mass norm of F(tau) u0 - T(tau) u0
  double slope = 0.0;          // log-log least squares
  bool exact = false;          // all errors at round-off level
  bool degenerate = false;     // some errors at round-off level, slope from the rest
};

/// Observed local order of F(tau) against the exact propagator.
inline ConsistencyProbe consistency_probe(const RationalScheme& scheme, const SparseMatrix& M, const SparseMatrix& K,
                                          const Eigen::VectorXd& u0, const std::vector<double>& taus) {
  if (taus.size() < 2) throw std::invalid_argument("consistency_probe: need at least two step sizes");
  const Eigen::MatrixXd Md(M), Kd(K);
  const ExactPropagator ex(Md, Kd);
  ConsistencyProbe r;
  r.taus = taus;
  const double scale = std::sqrt(std::max(0.0, u0.dot(Md * u0)));
  Stepper st(scheme, M, K);
  std::vector<double> lx, ly;
  for (double tau : taus) {
    const Eigen::VectorXd d = st.step(tau, u0) - ex.apply(tau, u0);
    const double e = std::sqrt(std::max(0.0, d.dot(Md * d)));
    r.errors.push_back(e);
    if (e > 100 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300)) {
      lx.push_back(std::log(tau));
      ly.push_back(std::log(e));
    }
  }
  if (lx.empty()) {
    r.exact = true;
    return r;
  }
  r.degenerate = lx.size() < taus.size();
  if (lx.size() < 2) return r;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

}  // namespace sgfem
