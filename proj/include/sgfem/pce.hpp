#pragma once

// Tensorized polynomial chaos: multi-index sets, basis evaluation,
// projections R_n, triple products, weighted Sobolev norms and the explicit
// projection error constants.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/orthopoly.hpp"

namespace sgfem {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& a) {
  int s = 0;
  for (int v : a) s += v;
  return s;
}

inline std::string format_multi_index(const MultiIndex& a) {
  std::string s;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (j) s += ',';
    s += std::to_string(a[j]);
  }
  return s;
}

/// Law of the random input Z: independent components, each Normal, Beta or Gamma.
class DistributionSpec {
 public:
  explicit DistributionSpec(std::vector<PolyFamily> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("DistributionSpec: need at least one component");
  }

  static DistributionSpec iid(const PolyFamily& f, int N) {
    if (N < 1) throw std::invalid_argument("DistributionSpec: N must be >= 1");
    return DistributionSpec(std::vector<PolyFamily>(static_cast<std::size_t>(N), f));
  }

  int dim() const { return static_cast<int>(components_.size()); }
  const PolyFamily& component(int j) const { return components_.at(static_cast<std::size_t>(j)); }
  const std::vector<PolyFamily>& components() const { return components_; }

  /// rho(z)^{alpha/2}
  double sobolev_weight(const MultiIndex& alpha, std::span<const double> z) const {
    double w = 1.0;
    for (int j = 0; j < dim(); ++j)
      if (alpha[static_cast<std::size_t>(j)] > 0)
        w *= std::pow(component(j).sobolev_weight(z[static_cast<std::size_t>(j)]),
                      0.5 * alpha[static_cast<std::size_t>(j)]);
    return w;
  }

 private:
  std::vector<PolyFamily> components_;
};

inline constexpr double kMaxMultiIndexSetSize = 1e7;

/// C(n + N, n) as a double; exact far beyond the size guard.
inline double binomial_count(int N, int n) {
  double c = 1.0;
  for (int i = 1; i <= n; ++i) c = c * (N + i) / i;
  return std::round(c);
}

/// Total-degree set {alpha : |alpha| <= n} in graded order. Within one total
/// degree, indices are sorted lexicographically descending, e.g. for N = 2:
/// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2). The set of degree n is therefore a
/// prefix of the set of any higher degree.
class MultiIndexSet {
 public:
  MultiIndexSet(int N, int n) : N_(N), n_(n) {
    if (N < 1) throw std::invalid_argument("MultiIndexSet: N must be >= 1");
    if (n < 0) throw std::invalid_argument("MultiIndexSet: n must be >= 0");
    if (binomial_count(N, n) > kMaxMultiIndexSetSize)
      throw std::invalid_argument("MultiIndexSet: problem too large (more than 1e7 indices)");
    MultiIndex cur(static_cast<std::size_t>(N), 0);
    for (int d = 0; d <= n; ++d) {
      degree_offsets_.push_back(indices_.size());
      emit(cur, 0, d);
    }
    degree_offsets_.push_back(indices_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) lookup_.emplace(indices_[i], i);
  }

  int dim() const { return N_; }
  int degree() const { return n_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Number of indices with total degree <= d (d <= degree()).
  std::size_t count_up_to(int d) const {
    if (d < 0) return 0;
    return degree_offsets_.at(static_cast<std::size_t>(std::min(d, n_)) + 1);
  }

  std::optional<std::size_t> position(const MultiIndex& a) const {
    auto it = lookup_.find(a);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void emit(MultiIndex& cur, int j, int remaining) {
    if (j == N_ - 1) {
      cur[static_cast<std::size_t>(j)] = remaining;
      indices_.push_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[static_cast<std::size_t>(j)] = v;
      emit(cur, j + 1, remaining - v);
    }
  }

  int N_;
  int n_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> degree_offsets_;
  std::map<MultiIndex, std::size_t> lookup_;
};

/// Tensor Gauss rule on R^N: q nodes per dimension, q^N points.
struct TensorQuadrature {
  int dim = 0;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

inline TensorQuadrature tensor_gauss(const DistributionSpec& dist, int q) {
  if (q < 1) throw std::invalid_argument("tensor_gauss: q must be >= 1");
  const int N = dist.dim();
  if (std::pow(static_cast<double>(q), N) > 5e7) throw std::invalid_argument("tensor_gauss: rule too large");
  std::vector<QuadratureRule> rules;
  for (int j = 0; j < N; ++j) rules.push_back(gauss_rule(dist.component(j), q));
  TensorQuadrature tq;
  tq.dim = N;
  std::vector<int> idx(static_cast<std::size_t>(N), 0);
  while (true) {
    std::vector<double> z(static_cast<std::size_t>(N));
    double w = 1.0;
    for (int j = 0; j < N; ++j) {
      z[static_cast<std::size_t>(j)] = rules[static_cast<std::size_t>(j)].nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      w *= rules[static_cast<std::size_t>(j)].weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    }
    tq.points.push_back(std::move(z));
    tq.weights.push_back(w);
    int j = 0;
    while (j < N && ++idx[static_cast<std::size_t>(j)] == q) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == N) break;
  }
  return tq;
}

/// (Phi_alpha(z))_{alpha in mis}, Phi_alpha = prod_j h^{(j)}_{alpha_j}(z_j).
inline std::vector<double> tensor_basis_eval(const DistributionSpec& dist, const MultiIndexSet& mis,
                                             std::span<const double> z) {
  if (static_cast<int>(z.size()) != dist.dim() || mis.dim() != dist.dim())
    throw std::invalid_argument("tensor_basis_eval: dimension mismatch");
  std::vector<std::vector<double>> univariate;
  for (int j = 0; j < dist.dim(); ++j)
    univariate.push_back(eval_orthonormal(dist.component(j), mis.degree(), z[static_cast<std::size_t>(j)]));
  std::vector<double> out(mis.size());
  for (std::size_t i = 0; i < mis.size(); ++i) {
    double v = 1.0;
    for (int j = 0; j < dist.dim(); ++j)
      v *= univariate[static_cast<std::size_t>(j)][static_cast<std::size_t>(mis[i][static_cast<std::size_t>(j)])];
    out[i] = v;
  }
  return out;
}

/// Rows: quadrature points, columns: basis functions.
inline Eigen::MatrixXd basis_matrix(const DistributionSpec& dist, const MultiIndexSet& mis,
                                    const TensorQuadrature& tq) {
  Eigen::MatrixXd V(static_cast<Eigen::Index>(tq.size()), static_cast<Eigen::Index>(mis.size()));
  for (std::size_t p = 0; p < tq.size(); ++p) {
    const auto phi = tensor_basis_eval(dist, mis, tq.points[p]);
    for (std::size_t i = 0; i < phi.size(); ++i) V(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = phi[i];
  }
  return V;
}

inline constexpr double kTripleProductDropTolerance = 1e-12;

/// Sparse eps_{alpha,beta,gamma} = E[Phi_alpha Phi_beta Phi_gamma] for
/// |alpha| <= 2n and |beta|, |gamma| <= n. Positions refer to the graded set of
/// degree 2n; the first d_n positions form the degree-n set.
class TripleProductTensor {
 public:
  struct Entry {
    std::size_t alpha;
    std::size_t beta;
    std::size_t gamma;
    double value;
  };

  TripleProductTensor(const DistributionSpec& dist, int n)
      : n_(n), outer_(dist.dim(), 2 * n), inner_(dist.dim(), n) {
    const int N = dist.dim();
    const int A = 2 * n;
    // Per-dimension tables t_j(a, b, c) = E[h_a h_b h_c], integrand degree <= 4n,
    // exact with 2n + 1 Gauss nodes. Entries are computed on the sorted triple
    // so that the table is exactly invariant under permutations.
    std::vector<std::vector<double>> tables(static_cast<std::size_t>(N));
    const std::size_t S = static_cast<std::size_t>(A) + 1;
    for (int j = 0; j < N; ++j) {
      const auto rule = gauss_rule(dist.component(j), 2 * n + 1);
      std::vector<std::vector<double>> h;
      for (double z : rule.nodes) h.push_back(eval_orthonormal(dist.component(j), A, z));
      auto& t = tables[static_cast<std::size_t>(j)];
      t.assign(S * S * S, 0.0);
      for (int a = 0; a <= A; ++a)
        for (int b = a; b <= A; ++b)
          for (int c = b; c <= A; ++c) {
            if (c > a + b || a + b + c > 4 * n) continue;
            double acc = 0.0;
            if (a == 0) {
              // E[h_b h_c] = delta_bc by orthonormality; stored exactly.
              acc = b == c ? 1.0 : 0.0;
            } else {
              for (std::size_t p = 0; p < rule.size(); ++p)
                acc += rule.weights[p] * h[p][static_cast<std::size_t>(a)] * h[p][static_cast<std::size_t>(b)] *
                       h[p][static_cast<std::size_t>(c)];
            }
            const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
            for (const auto& pr : perm)
              t[(static_cast<std::size_t>(pr[0]) * S + static_cast<std::size_t>(pr[1])) * S +
                static_cast<std::size_t>(pr[2])] = acc;
          }
    }
    for (std::size_t ia = 0; ia < outer_.size(); ++ia) {
      const MultiIndex& al = outer_[ia];
      const int da = total_degree(al);
      for (std::size_t ib = 0; ib < inner_.size(); ++ib) {
        const MultiIndex& be = inner_[ib];
        for (std::size_t ig = 0; ig < inner_.size(); ++ig) {
          const MultiIndex& ga = inner_[ig];
          if (da > total_degree(be) + total_degree(ga)) continue;
          double v = 1.0;
          for (int j = 0; j < N && v != 0.0; ++j) {
            const auto a = static_cast<std::size_t>(al[static_cast<std::size_t>(j)]);
            const auto b = static_cast<std::size_t>(be[static_cast<std::size_t>(j)]);
            const auto c = static_cast<std::size_t>(ga[static_cast<std::size_t>(j)]);
            v *= tables[static_cast<std::size_t>(j)][(a * S + b) * S + c];
          }
          if (std::abs(v) >= kTripleProductDropTolerance) entries_.push_back({ia, ib, ig, v});
        }
      }
    }
  }

  int degree() const { return n_; }
  /// Index set of alpha (degree 2n).
  const MultiIndexSet& outer() const { return outer_; }
  /// Index set of beta, gamma (degree n).
  const MultiIndexSet& inner() const { return inner_; }
  /// Sorted by (alpha, beta, gamma) positions.
  const std::vector<Entry>& entries() const { return entries_; }

  double value(std::size_t alpha, std::size_t beta, std::size_t gamma) const {
    auto key = [](const Entry& e) { return std::tuple{e.alpha, e.beta, e.gamma}; };
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::tuple{alpha, beta, gamma},
                               [&](const Entry& e, const auto& k) { return key(e) < k; });
    if (it != entries_.end() && key(*it) == std::tuple{alpha, beta, gamma}) return it->value;
    return 0.0;
  }

  double value(const MultiIndex& alpha, const MultiIndex& beta, const MultiIndex& gamma) const {
    const auto a = outer_.position(alpha);
    const auto b = inner_.position(beta);
    const auto c = inner_.position(gamma);
    if (!a || !b || !c) throw std::out_of_range("TripleProductTensor: index outside stored range");
    return value(*a, *b, *c);
  }

  /// One line per entry: "a0,a1 b0,b1 c0,c1 value", sorted by position.
  std::string to_text() const {
    std::ostringstream os;
    char buf[64];
    for (const auto& e : entries_) {
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      os << format_multi_index(outer_[e.alpha]) << ' ' << format_multi_index(inner_[e.beta]) << ' '
         << format_multi_index(inner_[e.gamma]) << ' ' << buf << '\n';
    }
    return os.str();
  }

 private:
  int n_;
  MultiIndexSet outer_;
  MultiIndexSet inner_;
  std::vector<Entry> entries_;
};

inline TripleProductTensor triple_products(const DistributionSpec& dist, int n) {
  if (n < 0) throw std::invalid_argument("triple_products: n must be >= 0");
  return TripleProductTensor(dist, n);
}

/// Chaos coefficients of a (possibly vector-valued) function, one payload per index.
struct PceVector {
  std::vector<Eigen::VectorXd> modes;

  std::size_t size() const { return modes.size(); }

  Eigen::VectorXd evaluate(const DistributionSpec& dist, const MultiIndexSet& mis, std::span<const double> z) const {
    const auto phi = tensor_basis_eval(dist, mis, z);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(modes.empty() ? 0 : modes.front().size());
    for (std::size_t i = 0; i < modes.size(); ++i) out += phi[i] * modes[i];
    return out;
  }
};

using PayloadFunction = std::function<Eigen::VectorXd(std::span<const double>)>;
using ScalarFunction = std::function<double(std::span<const double>)>;

/// f_hat_alpha = sum_p w_p f(z_p) Phi_alpha(z_p) with q Gauss nodes per dimension.
inline PceVector pce_project(const DistributionSpec& dist, const MultiIndexSet& mis, const PayloadFunction& f,
                             int q) {
  if (q < mis.degree() + 1) throw std::invalid_argument("pce_project: need q >= n + 1 nodes per dimension");
  const auto tq = tensor_gauss(dist, q);
  PceVector out;
  out.modes.assign(mis.size(), Eigen::VectorXd());
  Eigen::Index payload = -1;
  for (std::size_t p = 0; p < tq.size(); ++p) {
    const Eigen::VectorXd v = f(tq.points[p]);
    if (payload < 0) {
      payload = v.size();
      for (auto& m : out.modes) m = Eigen::VectorXd::Zero(payload);
    } else if (v.size() != payload) {
      throw std::invalid_argument("pce_project: payload dimension mismatch across samples");
    }
    const auto phi = tensor_basis_eval(dist, mis, tq.points[p]);
    for (std::size_t i = 0; i < mis.size(); ++i) out.modes[i] += (tq.weights[p] * phi[i]) * v;
  }
  return out;
}

inline std::vector<double> pce_project_scalar(const DistributionSpec& dist, const MultiIndexSet& mis,
                                              const ScalarFunction& f, int q) {
  const auto pv = pce_project(
      dist, mis, [&](std::span<const double> z) { return Eigen::VectorXd::Constant(1, f(z)); }, q);
  std::vector<double> out;
  for (const auto& m : pv.modes) out.push_back(m(0));
  return out;
}

/// Partial derivatives d^alpha f keyed by alpha; alpha = 0 is f itself.
using DerivativeTable = std::map<MultiIndex, ScalarFunction>;

/// (sum_{|alpha| <= order} || rho^{alpha/2} d^alpha f ||^2_{L2(P_Z)})^{1/2} by
/// tensor Gauss quadrature with q nodes per dimension.
inline double weighted_sobolev_norm(const DistributionSpec& dist, const DerivativeTable& derivs, int order, int q) {
  if (order < 0) throw std::invalid_argument("weighted_sobolev_norm: order must be >= 0");
  const MultiIndexSet mis(dist.dim(), order);
  for (const auto& a : mis)
    if (!derivs.count(a))
      throw std::invalid_argument("weighted_sobolev_norm: missing derivative callback for (" +
                                  format_multi_index(a) + ")");
  const auto tq = tensor_gauss(dist, q);
  double acc = 0.0;
  for (const auto& a : mis) {
    const auto& fn = derivs.at(a);
    double s = 0.0;
    for (std::size_t p = 0; p < tq.size(); ++p) {
      const double v = dist.sobolev_weight(a, tq.points[p]) * fn(tq.points[p]);
      s += tq.weights[p] * v * v;
    }
    acc += s;
  }
  return std::sqrt(acc);
}

/// C_{l,N} = N^{l/2} prod_{r<l} max_j C_j(2r).
inline double pce_error_constant(const DistributionSpec& dist, int l) {
  if (l < 0) throw std::invalid_argument("pce_error_constant: l must be >= 0");
  double c = std::pow(static_cast<double>(dist.dim()), 0.5 * l);
  for (int r = 0; r < l; ++r) {
    double m = 0.0;
    for (const auto& f : dist.components()) m = std::max(m, sl_operator_bound(f, 2 * r));
    c *= m;
  }
  return c;
}

/// Lower eigenvalue sum bound d(n) = min_{|alpha| >= n} sum_j lambda^j_{alpha_j}.
/// Reported only; the error bound itself uses n^{-l}.
inline double eigenvalue_sum_bound(const DistributionSpec& dist, int n) {
  if (n <= 0) return 0.0;
  // The minimum is attained at |alpha| = n since every lambda_k is increasing in k.
  const MultiIndexSet mis(dist.dim(), n);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = mis.count_up_to(n - 1); i < mis.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < dist.dim(); ++j) s += sl_eigenvalue(dist.component(j), mis[i][static_cast<std::size_t>(j)]);
    best = std::min(best, s);
  }
  return best;
}

}  // namespace sgfem
