#pragma once

// Structural invariants of one configuration, checked at a small sweep point.

#include <cmath>
#include <string>
#include <vector>

#include "sgfem/harness/sweep.hpp"

namespace sgfem::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

inline std::vector<CheckResult> run_checks(Experiment& ex, int n, int m) {
  const auto& cfg = ex.config();
  const auto& dist = ex.distribution();
  const auto& field = ex.field();
  const FeSpace space(ex.mesh(m), cfg.fe_order);
  const MultiIndexSet mis(dist.dim(), n);
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, double v, std::string detail) {
    out.push_back({std::move(name), ok, v, std::move(detail)});
  };

  const auto eps = triple_products(dist, n);
  double eps_asym = 0.0;
  const std::size_t outer = eps.outer().size(), inner = eps.inner().size();
  for (std::size_t a = 0; a < std::min<std::size_t>(outer, inner); ++a)
    for (std::size_t b = 0; b < inner; ++b)
      for (std::size_t c = 0; c < inner; ++c)
        eps_asym = std::max({eps_asym, std::abs(eps.value(a, b, c) - eps.value(a, c, b)),
                             std::abs(eps.value(a, b, c) - eps.value(b, a, c))});
  add("triple_product_symmetry", eps_asym <= 1e-14, eps_asym, "max |eps_abc - eps_permuted|");

  double aliasing = 0.0;
  const int q = cfg.coefficient_quadrature > 0 ? cfg.coefficient_quadrature : -1;
  const auto op = build_sg_operator(dist, n, space, field, q, &aliasing);
  const double asym = asymmetry(op.stiffness);
  add("block_symmetry", asym == 0.0, asym, "max |A - A^T|");

  const double coer = block_coercivity(op, space);
  add("block_coercivity", coer >= field.kappa() * (1 - 1e-6), coer,
      "min eigenvalue against the H1_0 Gram matrix, kappa = " + short_num(field.kappa()));

  const double lmin = block_min_eigenvalue(op);
  add("resolvent_contractive", lmin >= -1e-10, lmin, "min eigenvalue of (A, I x M)");

  const auto sch = RationalScheme::by_name(cfg.scheme).a_stability_probe();
  add("scheme_a_stable", sch.a_stable, sch.max_abs_boundary, "max |r(iy)| on the imaginary axis");

  std::vector<std::vector<double>> zs;
  for (const auto& p : tensor_gauss(dist, 12).points) zs.emplace_back(p.begin(), p.end());
  std::vector<Point> xs;
  const int g = 9;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < (cfg.dim == 2 ? g : 1); ++j) xs.emplace_back(static_cast<double>(i) / (g - 1), static_cast<double>(j) / (g - 1));
  const auto b = eval_bounds_check(field, zs, xs);
  add("coefficient_bounds", b.ok(), b.observed_min,
      "observed eigenvalues in [" + short_num(b.observed_min) + ", " + short_num(b.observed_max) + "]");

  add("aliasing_probe", true, aliasing, "largest coefficient matrix entry beyond degree 2n (informational)");

  const std::size_t dof = space.num_dofs();
  if (mis.size() * dof <= kBruteForceLimit) {
    const int qo = std::max(2 * n + 1, n + 2);
    try {
      const Eigen::MatrixXd bf = brute_force_rnarn(dist, n, space, field, qo);
      const auto opq = build_sg_operator(dist, n, space, field, qo);
      const Eigen::MatrixXd A(opq.stiffness);
      const double rel = (bf - A).norm() / std::max(1e-300, A.norm());
      add("oracle_equivalence", rel <= 1e-10, rel, "relative Frobenius distance to the dense oracle, q = " + std::to_string(qo));
    } catch (const std::invalid_argument& e) {
      add("oracle_equivalence", true, 0.0, std::string("skipped: ") + e.what());
    }
  } else {
    add("oracle_equivalence", true, 0.0, "skipped: system too large for the dense oracle");
  }

  const SgState s0 = initial_coefficients(dist, mis, ex.datum(), space);
  const auto M = assemble_mass(space).matrix();
  double modal = 0.0;
  for (std::size_t k = 0; k < mis.size(); ++k) modal += s0.mode(k).dot(M * s0.mode(k));
  const auto tq = tensor_gauss(dist, n + 1);
  double quad = 0.0;
  for (std::size_t p = 0; p < tq.size(); ++p) {
    const Eigen::VectorXd u = s0.reconstruct(dist, mis, tq.points[p]);
    quad += tq.weights[p] * u.dot(M * u);
  }
  const double pr = std::abs(modal - quad) / std::max(1e-300, modal);
  add("parseval", pr <= 1e-12, pr, "sum of modal norms against the quadrature norm");
  return out;
}

}  // namespace sgfem::harness
