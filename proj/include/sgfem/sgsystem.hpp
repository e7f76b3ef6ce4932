#pragma once

// The coupled deterministic system of the stochastic Galerkin method: chaos
// coefficients A_alpha of the stiffness, the block operator, the block mass and
// the initial coefficient vector.
//
// Block layout is mode-major: global index beta * dof + i.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/coeffs.hpp"
#include "sgfem/linalg.hpp"
#include "sgfem/pce.hpp"
#include "sgfem/spatial.hpp"

namespace sgfem {

/// Default quadrature size per dimension for the chaos coefficients of a field:
/// exact for polynomial fields, and with a generous margin otherwise.
inline int default_coefficient_quadrature(int n, std::optional<int> z_degree) {
  if (z_degree) return std::max(2 * n + 1, *z_degree + 2 * n + 1);
  return std::max(2 * n + 1, 4 * n + 24);
}

struct CoefficientMatrices {
  MultiIndexSet set;                  // indices alpha, total degree <= degree
  std::vector<SymSparseMatrix> mats;  // A_alpha in the order of `set`
  double aliasing_probe = 0.0;        // max |A_alpha| entry over the probe band above `set`
  int quadrature = 0;

  const SymSparseMatrix& operator[](std::size_t i) const { return mats.at(i); }
};

/// A_alpha = sum_p w_p Phi_alpha(z_p) K(z_p) for |alpha| <= degree (default 2n)
/// with q Gauss nodes per dimension. The probe band degree < |alpha| <= degree + 2
/// is evaluated and only its largest entry is kept.
inline CoefficientMatrices pce_coefficient_matrices(const DistributionSpec& dist, int n, const FeSpace& space,
                                                    const CoefficientField& field, int q = -1, int degree = -1) {
  if (n < 0) throw std::invalid_argument("pce_coefficient_matrices: n must be >= 0");
  if (field.dim() != space.mesh().dim()) throw std::invalid_argument("pce_coefficient_matrices: dimension mismatch");
  if (degree < 0) degree = 2 * n;
  if (q < 0) q = default_coefficient_quadrature(n, field.z_degree());
  if (q < 2 * n + 1) throw std::invalid_argument("pce_coefficient_matrices: need q >= 2n + 1");
  const MultiIndexSet probe(dist.dim(), degree + 2);
  const std::size_t keep = probe.count_up_to(degree);
  const auto tq = tensor_gauss(dist, q);
  const int qdeg = std::max(2 * space.order(), field.stiffness_degree(space.order()));

  std::vector<SparseMatrix> acc(probe.size());
  for (std::size_t p = 0; p < tq.size(); ++p) {
    const SparseMatrix Kp = assemble_stiffness(space, field.at(tq.points[p]), qdeg).matrix();
    const auto phi = tensor_basis_eval(dist, probe, tq.points[p]);
    for (std::size_t a = 0; a < probe.size(); ++a) {
      if (p == 0) acc[a] = (tq.weights[p] * phi[a]) * Kp;
      else acc[a] += (tq.weights[p] * phi[a]) * Kp;
    }
  }
  CoefficientMatrices out{MultiIndexSet(dist.dim(), degree), {}, 0.0, q};
  for (std::size_t a = 0; a < probe.size(); ++a) {
    if (a < keep) {
      // Each term is exactly symmetric, so the sums are too.
      out.mats.push_back(SymSparseMatrix::from_upper(acc[a]));
    } else {
      for (Eigen::Index k = 0; k < acc[a].outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(acc[a], k); it; ++it)
          out.aliasing_probe = std::max(out.aliasing_probe, std::abs(it.value()));
    }
  }
  return out;
}

/// Stochastic Galerkin operator: global stiffness and mass of size d_n * dof.
struct SgOperator {
  int n = 0;
  MultiIndexSet mis{1, 0};
  std::size_t dof = 0;
  SparseMatrix stiffness;  // blocks sum_alpha eps_{alpha beta gamma} A_alpha
  SparseMatrix mass;       // I_{d_n} (x) M

  std::size_t modes() const { return mis.size(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(mis.size() * dof); }

  Eigen::MatrixXd block(std::size_t beta, std::size_t gamma) const {
    const auto d = static_cast<Eigen::Index>(dof);
    return Eigen::MatrixXd(stiffness.block(static_cast<Eigen::Index>(beta) * d, static_cast<Eigen::Index>(gamma) * d, d, d));
  }
};

inline SparseMatrix block_diagonal(const SparseMatrix& M, std::size_t copies) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(M.nonZeros()) * copies);
  for (std::size_t b = 0; b < copies; ++b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * M.rows();
    for (Eigen::Index k = 0; k < M.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(M, k); it; ++it) t.emplace_back(off + it.row(), off + it.col(), it.value());
  }
  SparseMatrix out(M.rows() * static_cast<Eigen::Index>(copies), M.cols() * static_cast<Eigen::Index>(copies));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// Block (beta, gamma) = sum_{|alpha| <= alpha_degree} eps_{alpha beta gamma} A_alpha,
/// alpha_degree = 2n by default. Only beta <= gamma is computed; the lower
/// blocks are mirrored, so the result is symmetric bit for bit.
inline SgOperator assemble_block_operator(const CoefficientMatrices& coeff, const TripleProductTensor& eps,
                                          const SymSparseMatrix& mass, int alpha_degree = -1) {
  const int n = eps.degree();
  if (alpha_degree < 0) alpha_degree = 2 * n;
  if (alpha_degree > 2 * n) throw std::invalid_argument("assemble_block_operator: alpha degree above 2n is not stored in eps");
  if (coeff.set.degree() < alpha_degree || coeff.set.dim() != eps.inner().dim())
    throw std::invalid_argument("assemble_block_operator: coefficient matrices do not cover |alpha| <= " +
                                std::to_string(alpha_degree));
  const std::size_t n_alpha = eps.outer().count_up_to(alpha_degree);
  const std::size_t d = eps.inner().size();
  const auto dof = static_cast<Eigen::Index>(coeff.mats.empty() ? 0 : coeff.mats.front().rows());
  if (mass.rows() != dof) throw std::invalid_argument("assemble_block_operator: mass does not match coefficient matrices");

  // (beta, gamma) -> [(alpha, eps)] in graded alpha order.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, double>>> terms;
  for (const auto& e : eps.entries())
    if (e.alpha < n_alpha && e.beta <= e.gamma) terms[{e.beta, e.gamma}].emplace_back(e.alpha, e.value);

  std::vector<Triplet> t;
  for (const auto& [bg, list] : terms) {
    const auto [beta, gamma] = bg;
    SparseMatrix B(dof, dof);
    for (const auto& [alpha, v] : list) B += v * coeff.mats[alpha].matrix();
    const Eigen::Index ob = static_cast<Eigen::Index>(beta) * dof, og = static_cast<Eigen::Index>(gamma) * dof;
    for (Eigen::Index k = 0; k < B.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
        if (beta == gamma) {
          if (it.row() <= it.col()) t.emplace_back(ob + it.row(), og + it.col(), it.value());
        } else {
          t.emplace_back(ob + it.row(), og + it.col(), it.value());
        }
      }
  }
  SgOperator op;
  op.n = n;
  op.mis = eps.inner();
  op.dof = static_cast<std::size_t>(dof);
  op.stiffness = SymSparseMatrix(static_cast<Eigen::Index>(d) * dof, t).matrix();
  op.mass = block_diagonal(mass.matrix(), d);
  return op;
}

/// Convenience: the full pipeline for one configuration.
inline SgOperator build_sg_operator(const DistributionSpec& dist, int n, const FeSpace& space,
                                    const CoefficientField& field, int q = -1, double* aliasing = nullptr) {
  const auto coeff = pce_coefficient_matrices(dist, n, space, field, q);
  if (aliasing) *aliasing = coeff.aliasing_probe;
  return assemble_block_operator(coeff, triple_products(dist, n), assemble_mass(space));
}

/// Chaos coefficients u_beta(t), stored mode-major in one vector.
struct SgState {
  double time = 0.0;
  std::size_t dof = 0;
  Eigen::VectorXd coefficients;

  std::size_t modes() const { return dof ? static_cast<std::size_t>(coefficients.size()) / dof : 0; }
  auto mode(std::size_t beta) { return coefficients.segment(static_cast<Eigen::Index>(beta * dof), static_cast<Eigen::Index>(dof)); }
  auto mode(std::size_t beta) const {
    return coefficients.segment(static_cast<Eigen::Index>(beta * dof), static_cast<Eigen::Index>(dof));
  }

  /// sum_beta Phi_beta(z) u_beta
  Eigen::VectorXd reconstruct(const DistributionSpec& dist, const MultiIndexSet& mis, std::span<const double> z) const {
    if (mis.size() != modes()) throw std::invalid_argument("SgState::reconstruct: index set does not match");
    const auto phi = tensor_basis_eval(dist, mis, z);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof));
    for (std::size_t b = 0; b < phi.size(); ++b) u += phi[b] * mode(b);
    return u;
  }
};

/// Mode beta = L2 projection of E[u0 Phi_beta] (by quadrature with q nodes per dimension).
inline SgState initial_coefficients(const DistributionSpec& dist, const MultiIndexSet& mis, const InitialDatum& u0,
                                    const FeSpace& space, int q = -1) {
  if (q < 0) q = u0.deterministic ? mis.degree() + 1 : std::max(2 * mis.degree() + 1, 4 * mis.degree() + 24);
  if (q < mis.degree() + 1) throw std::invalid_argument("initial_coefficients: need q >= n + 1");
  const std::size_t dof = space.num_dofs();
  SgState s{0.0, dof, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mis.size() * dof))};
  const SymmetricSolver solver(assemble_mass(space).matrix());
  if (u0.deterministic) {
    const std::vector<double> z0(static_cast<std::size_t>(dist.dim()), 0.0);
    s.mode(0) = solver.solve(load_vector(space, u0.at(z0)));
    return s;
  }
  const auto tq = tensor_gauss(dist, q);
  std::vector<Eigen::VectorXd> loads(mis.size(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof)));
  for (std::size_t p = 0; p < tq.size(); ++p) {
    const Eigen::VectorXd b = load_vector(space, u0.at(tq.points[p]));
    const auto phi = tensor_basis_eval(dist, mis, tq.points[p]);
    for (std::size_t a = 0; a < mis.size(); ++a) loads[a] += (tq.weights[p] * phi[a]) * b;
  }
  for (std::size_t a = 0; a < mis.size(); ++a) s.mode(a) = solver.solve(loads[a]);
  return s;
}

inline constexpr std::size_t kBruteForceLimit = 2000;

/// Oracle for the block operator. On the collocation space (Gauss nodes x dofs)
/// it forms R_n = (V V^T W) (x) I, A = blockdiag(M^{-1} K(z_p)), the product
/// R_n A R_n, and returns its restriction to the chaos basis in weak form
/// (I (x) M) P R_n A R_n E, with E = V (x) I and P = V^T W (x) I. All dense.
inline Eigen::MatrixXd brute_force_rnarn(const DistributionSpec& dist, int n, const FeSpace& space,
                                         const CoefficientField& field, int q) {
  const MultiIndexSet mis(dist.dim(), n);
  const auto dof = static_cast<Eigen::Index>(space.num_dofs());
  const auto d = static_cast<Eigen::Index>(mis.size());
  if (static_cast<std::size_t>(d * dof) > kBruteForceLimit)
    throw std::invalid_argument("brute_force_rnarn: d_n * dof exceeds the oracle limit of 2000");
  const auto tq = tensor_gauss(dist, q);
  const auto Q = static_cast<Eigen::Index>(tq.size());
  if (Q * dof > 4 * static_cast<Eigen::Index>(kBruteForceLimit))
    throw std::invalid_argument("brute_force_rnarn: collocation space too large for the dense oracle");

  const Eigen::MatrixXd M = assemble_mass(space).dense();
  const Eigen::LLT<Eigen::MatrixXd> Mfac(M);
  const Eigen::MatrixXd V = basis_matrix(dist, mis, tq);
  Eigen::VectorXd w(Q);
  for (Eigen::Index p = 0; p < Q; ++p) w(p) = tq.weights[static_cast<std::size_t>(p)];
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dof, dof);
  auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
  };
  const int qdeg = std::max(2 * space.order(), field.stiffness_degree(space.order()));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Q * dof, Q * dof);
  for (Eigen::Index p = 0; p < Q; ++p)
    A.block(p * dof, p * dof, dof, dof) =
        Mfac.solve(assemble_stiffness(space, field.at(tq.points[static_cast<std::size_t>(p)]), qdeg).dense());
  const Eigen::MatrixXd VtW = V.transpose() * w.asDiagonal();
  const Eigen::MatrixXd R = kron(V * VtW, I);
  const Eigen::MatrixXd E = kron(V, I);
  const Eigen::MatrixXd P = kron(VtW, I);
  const Eigen::MatrixXd strong = P * (R * (A * (R * E)));
  return kron(Eigen::MatrixXd::Identity(d, d), M) * strong;
}

/// Smallest generalized eigenvalue of (A, I (x) G) with G the H^1_0 Gram matrix.
inline double block_coercivity(const SgOperator& op, const FeSpace& space) {
  const SparseMatrix G = block_diagonal(h1_gram(space).matrix(), op.modes());
  return min_generalized_eigenvalue(Eigen::MatrixXd(op.stiffness), Eigen::MatrixXd(G));
}

/// Smallest generalized eigenvalue of (A, I (x) M); nonnegative means the
/// resolvent lambda (lambda + A)^{-1} is a contraction in the mass norm.
inline double block_min_eigenvalue(const SgOperator& op) {
  return min_generalized_eigenvalue(Eigen::MatrixXd(op.stiffness), Eigen::MatrixXd(op.mass));
}

}  // namespace sgfem
