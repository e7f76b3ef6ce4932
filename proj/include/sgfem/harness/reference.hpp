#pragma once

// Reference solutions and the error in the Bochner norm
// ||v||^2 = E ||v(z)||^2_{L2(G)}, realized with Gauss quadrature in z.

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/coeffs.hpp"
#include "sgfem/pce.hpp"
#include "sgfem/sgsystem.hpp"
#include "sgfem/spatial.hpp"
#include "sgfem/timestep.hpp"

namespace sgfem::harness {

/// Exact solution of u_t = a(z) u_xx on (0,1), u = 0 at both ends, for
/// u0 = sum_j c_j sin((j+1) pi x):  u = sum_j c_j exp(-a(z) ((j+1) pi)^2 t) sin((j+1) pi x).
inline SpatialFunction analytic_reference(const std::vector<double>& sine_coeffs, double a_z, double t) {
  std::vector<double> amp(sine_coeffs.size());
  for (std::size_t j = 0; j < amp.size(); ++j) {
    const double k = static_cast<double>(j + 1) * std::numbers::pi;
    amp[j] = sine_coeffs[j] * std::exp(-a_z * k * k * t);
  }
  return [amp](const Point& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < amp.size(); ++j) s += amp[j] * std::sin(static_cast<double>(j + 1) * std::numbers::pi * x(0));
    return s;
  };
}

/// Whether the closed form applies: 1-D field constant in x, deterministic sine data.
inline bool analytic_applicable(const CoefficientField& field, const InitialDatum& u0) {
  return field.dim() == 1 && field.x_degree() == 0 && u0.deterministic && !u0.sine_coeffs.empty();
}

/// a(z) of a field that is constant in x.
inline double scalar_coefficient(const CoefficientField& field, std::span<const double> z) {
  return field(z, Point(0.5, 0.5))(0, 0);
}

/// Deterministic fine solves at the tensor Gauss nodes in z.
struct CollocationReference {
  TensorQuadrature nodes;
  FeSpace space;
  SymSparseMatrix mass;
  std::vector<Eigen::VectorXd> samples;  // one fine dof vector per node
};

inline CollocationReference collocation_reference(const DistributionSpec& dist, int q_ref, const FeSpace& space,
                                                  const TimeGrid& grid, const CoefficientField& field,
                                                  const InitialDatum& u0,
                                                  const RationalScheme& scheme = RationalScheme::crank_nicolson()) {
  CollocationReference r{tensor_gauss(dist, q_ref), space, assemble_mass(space), {}};
  const int qdeg = std::max(2 * space.order(), field.stiffness_degree(space.order()));
  const SymmetricSolver msolve(r.mass.matrix());
  for (std::size_t p = 0; p < r.nodes.size(); ++p) {
    const auto& z = r.nodes.points[p];
    try {
      const SparseMatrix K = assemble_stiffness(space, field.at(z), qdeg).matrix();
      const Eigen::VectorXd v0 = msolve.solve(load_vector(space, u0.at(z)));
      r.samples.push_back(evolve_final(scheme, grid, r.mass.matrix(), K, v0));
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "collocation_reference: node " << p << " (z =";
      for (double v : z) os << ' ' << v;
      os << ") failed: " << e.what();
      throw NumericalError(os.str());
    }
  }
  return r;
}

/// sqrt(sum_p w_p ||approx_p - ref_p||^2_M) for samples already on the reference space.
inline double error_norm_samples(const CollocationReference& ref, const std::vector<Eigen::VectorXd>& approx) {
  if (approx.size() != ref.samples.size()) throw std::invalid_argument("error_norm_samples: node count mismatch");
  double acc = 0.0;
  for (std::size_t p = 0; p < approx.size(); ++p) {
    if (approx[p].size() != ref.samples[p].size()) throw std::invalid_argument("error_norm_samples: size mismatch");
    const Eigen::VectorXd d = approx[p] - ref.samples[p];
    acc += ref.nodes.weights[p] * d.dot(ref.mass.matrix() * d);
  }
  return std::sqrt(std::max(0.0, acc));
}

/// Error of an SG state against a collocation reference; the state is
/// reconstructed at each node and prolonged to the (nested) reference space.
inline double error_norm_H(const SgState& approx, const DistributionSpec& dist, const MultiIndexSet& mis,
                           const FeSpace& space, const CollocationReference& ref) {
  if (!is_nested(space, ref.space))
    throw std::invalid_argument("error_norm_H: approximation space is not nested in the reference space");
  const SparseMatrix P = prolongation_matrix(space, ref.space);
  std::vector<Eigen::VectorXd> a;
  a.reserve(ref.nodes.size());
  for (const auto& z : ref.nodes.points) a.push_back(P * approx.reconstruct(dist, mis, z));
  return error_norm_samples(ref, a);
}

/// Collocation reference compared with another one on a nested coarser space.
inline double reference_difference(const CollocationReference& coarse, const CollocationReference& fine) {
  if (!is_nested(coarse.space, fine.space) || coarse.nodes.size() != fine.nodes.size())
    throw std::invalid_argument("reference_difference: references are not comparable");
  const SparseMatrix P = prolongation_matrix(coarse.space, fine.space);
  std::vector<Eigen::VectorXd> a;
  for (const auto& s : coarse.samples) a.push_back(P * s);
  return error_norm_samples(fine, a);
}

/// Error against a closed-form solution exact(z, x), with q Gauss nodes per
/// dimension in z and high-order element quadrature in x.
inline double error_norm_H_analytic(const SgState& approx, const DistributionSpec& dist, const MultiIndexSet& mis,
                                    const FeSpace& space,
                                    const std::function<SpatialFunction(std::span<const double>)>& exact, int q) {
  const auto tq = tensor_gauss(dist, q);
  double acc = 0.0;
  for (std::size_t p = 0; p < tq.size(); ++p) {
    const double e = l2_error(space, approx.reconstruct(dist, mis, tq.points[p]), exact(tq.points[p]));
    acc += tq.weights[p] * e * e;
  }
  return std::sqrt(acc);
}

}  // namespace sgfem::harness
