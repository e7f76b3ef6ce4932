#pragma once

// Lagrange finite elements (P1, P2) on structured meshes of (0,1) and the unit
// square with homogeneous Dirichlet conditions.
//
// Mesh of the square: m x m squares, each split along its main diagonal into
// (v00, v10, v11) and (v00, v11, v01). Nodes of a P_k space lie on the
// lattice with spacing 1/(k m); the retained dofs are the interior lattice
// points, numbered x-fastest.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sgfem/linalg.hpp"
#include "sgfem/orthopoly.hpp"

namespace sgfem {

using Point = Eigen::Vector2d;  // 1-D problems use x(0) and ignore x(1)
/// Diffusion coefficient at a point: 2x2 Hermitian in 2-D, (0,0) entry in 1-D.
using SpatialCoefficient = std::function<Eigen::Matrix2d(const Point&)>;
using SpatialFunction = std::function<double(const Point&)>;

class Mesh {
 public:
  Mesh(int dim, int m) : dim_(dim), m_(m) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("Mesh: dim must be 1 or 2");
    if (m < 1) throw std::invalid_argument("Mesh: need at least one cell per direction");
  }

  static Mesh interval(int m) { return Mesh(1, m); }
  static Mesh unit_square(int m) { return Mesh(2, m); }

  int dim() const { return dim_; }
  int cells_per_side() const { return m_; }
  std::size_t num_cells() const { return dim_ == 1 ? static_cast<std::size_t>(m_) : 2u * m_ * m_; }
  /// Largest element diameter.
  double h() const { return dim_ == 1 ? 1.0 / m_ : std::sqrt(2.0) / m_; }

  /// Vertex lattice coordinates (in units of 1/m) of cell c.
  std::vector<std::array<int, 2>> cell_vertices(std::size_t c) const {
    if (dim_ == 1) return {{static_cast<int>(c), 0}, {static_cast<int>(c) + 1, 0}};
    const int sq = static_cast<int>(c / 2);
    const int i = sq % m_, j = sq / m_;
    if (c % 2 == 0) return {{i, j}, {i + 1, j}, {i + 1, j + 1}};
    return {{i, j}, {i + 1, j + 1}, {i, j + 1}};
  }

  bool operator==(const Mesh&) const = default;

 private:
  int dim_;
  int m_;
};

/// Quadrature on the reference element: [0,1] or the triangle (0,0),(1,0),(0,1).
struct ReferenceQuadrature {
  std::vector<Point> points;
  std::vector<double> weights;  // sum = measure of the reference element
};

/// Exact for polynomials of total degree <= degree.
inline ReferenceQuadrature reference_quadrature(int dim, int degree) {
  const int q = std::max(1, (degree + 2) / 2);
  const auto leg = gauss_rule(PolyFamily::jacobi(0, 0), q);
  ReferenceQuadrature r;
  if (dim == 1) {
    for (std::size_t i = 0; i < leg.size(); ++i) {
      r.points.emplace_back(0.5 * (leg.nodes[i] + 1.0), 0.0);
      r.weights.push_back(leg.weights[i]);
    }
    return r;
  }
  // Collapsed (Duffy) rule: v carries the density proportional to (1 - v).
  const auto jac = gauss_rule(PolyFamily::jacobi(1, 0), q);
  for (std::size_t j = 0; j < jac.size(); ++j) {
    const double v = 0.5 * (jac.nodes[j] + 1.0);
    for (std::size_t i = 0; i < leg.size(); ++i) {
      const double u = 0.5 * (leg.nodes[i] + 1.0);
      r.points.emplace_back(u * (1.0 - v), v);
      r.weights.push_back(0.5 * leg.weights[i] * jac.weights[j]);
    }
  }
  return r;
}

/// Shape functions and reference gradients at a reference point.
/// Local order: vertices, then (P2) edge midpoints 01, 12, 20; in 1-D the
/// midpoint follows the two end points.
inline void reference_shape(int dim, int order, const Point& xi, Eigen::VectorXd& phi, Eigen::MatrixXd& dphi) {
  if (dim == 1) {
    const double t = xi(0);
    if (order == 1) {
      phi.resize(2);
      dphi.resize(2, 1);
      phi << 1 - t, t;
      dphi << -1, 1;
    } else {
      phi.resize(3);
      dphi.resize(3, 1);
      phi << (1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t);
      dphi << 4 * t - 3, 4 * t - 1, 4 - 8 * t;
    }
    return;
  }
  const double u = xi(0), v = xi(1);
  const double l0 = 1 - u - v, l1 = u, l2 = v;
  const Eigen::Vector2d g0(-1, -1), g1(1, 0), g2(0, 1);
  if (order == 1) {
    phi.resize(3);
    dphi.resize(3, 2);
    phi << l0, l1, l2;
    dphi.row(0) = g0;
    dphi.row(1) = g1;
    dphi.row(2) = g2;
    return;
  }
  phi.resize(6);
  dphi.resize(6, 2);
  phi << l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0;
  dphi.row(0) = (4 * l0 - 1) * g0;
  dphi.row(1) = (4 * l1 - 1) * g1;
  dphi.row(2) = (4 * l2 - 1) * g2;
  dphi.row(3) = 4 * (l0 * g1 + l1 * g0);
  dphi.row(4) = 4 * (l1 * g2 + l2 * g1);
  dphi.row(5) = 4 * (l2 * g0 + l0 * g2);
}

class FeSpace {
 public:
  FeSpace(Mesh mesh, int order) : mesh_(mesh), order_(order) {
    if (order != 1 && order != 2) throw std::invalid_argument("FeSpace: order must be 1 or 2");
    const int n = lattice_size();
    interior_per_side_ = n - 2;
    ndofs_ = mesh_.dim() == 1 ? static_cast<std::size_t>(interior_per_side_)
                              : static_cast<std::size_t>(interior_per_side_) * interior_per_side_;
  }

  const Mesh& mesh() const { return mesh_; }
  int order() const { return order_; }
  std::size_t num_dofs() const { return ndofs_; }
  /// Nodes per direction including the boundary: order * m + 1.
  int lattice_size() const { return order_ * mesh_.cells_per_side() + 1; }
  int nodes_per_cell() const { return mesh_.dim() == 1 ? order_ + 1 : (order_ == 1 ? 3 : 6); }

  /// Dof index of lattice node (I, J), or -1 on the boundary.
  long lattice_dof(int I, int J) const {
    const int n = lattice_size();
    if (I <= 0 || I >= n - 1) return -1;
    if (mesh_.dim() == 1) return I - 1;
    if (J <= 0 || J >= n - 1) return -1;
    return static_cast<long>(J - 1) * interior_per_side_ + (I - 1);
  }

  Point lattice_point(int I, int J) const {
    const double s = 1.0 / (order_ * mesh_.cells_per_side());
    return mesh_.dim() == 1 ? Point(I * s, 0.0) : Point(I * s, J * s);
  }

  /// Lattice coordinates of the local nodes of cell c.
  std::vector<std::array<int, 2>> cell_nodes(std::size_t c) const {
    auto v = mesh_.cell_vertices(c);
    for (auto& p : v) {
      p[0] *= order_;
      p[1] *= order_;
    }
    if (order_ == 2) {
      if (mesh_.dim() == 1) {
        v.push_back({(v[0][0] + v[1][0]) / 2, 0});
      } else {
        const auto a = v[0], b = v[1], c2 = v[2];
        v.push_back({(a[0] + b[0]) / 2, (a[1] + b[1]) / 2});
        v.push_back({(b[0] + c2[0]) / 2, (b[1] + c2[1]) / 2});
        v.push_back({(c2[0] + a[0]) / 2, (c2[1] + a[1]) / 2});
      }
    }
    return v;
  }

  std::vector<long> cell_dofs(std::size_t c) const {
    std::vector<long> d;
    for (const auto& p : cell_nodes(c)) d.push_back(lattice_dof(p[0], p[1]));
    return d;
  }

  /// Affine map x = x0 + J xi of cell c.
  void cell_geometry(std::size_t c, Point& x0, Eigen::Matrix2d& J) const {
    const double s = 1.0 / mesh_.cells_per_side();
    const auto v = mesh_.cell_vertices(c);
    x0 = Point(v[0][0] * s, v[0][1] * s);
    J.setIdentity();
    if (mesh_.dim() == 1) {
      J(0, 0) = s;
      return;
    }
    J(0, 0) = (v[1][0] - v[0][0]) * s;
    J(1, 0) = (v[1][1] - v[0][1]) * s;
    J(0, 1) = (v[2][0] - v[0][0]) * s;
    J(1, 1) = (v[2][1] - v[0][1]) * s;
  }

  std::vector<Point> dof_coordinates() const {
    std::vector<Point> out(ndofs_);
    const int n = lattice_size();
    for (int J = 0; J < (mesh_.dim() == 1 ? 1 : n); ++J)
      for (int I = 0; I < n; ++I) {
        const long d = lattice_dof(I, J);
        if (d >= 0) out[static_cast<std::size_t>(d)] = lattice_point(I, J);
      }
    return out;
  }

  /// Locates the cell containing x and its reference coordinates.
  std::size_t locate(const Point& x, Point& xi) const {
    const int m = mesh_.cells_per_side();
    auto cell_index = [m](double t) { return std::clamp(static_cast<int>(std::floor(t * m)), 0, m - 1); };
    const int i = cell_index(x(0));
    if (mesh_.dim() == 1) {
      xi = Point(x(0) * m - i, 0.0);
      return static_cast<std::size_t>(i);
    }
    const int j = cell_index(x(1));
    const double a = x(0) * m - i, b = x(1) * m - j;
    const std::size_t sq = static_cast<std::size_t>(j) * m + i;
    if (a >= b) {  // (v00, v10, v11): x = v00 + u (1,0) + v (1,1)
      xi = Point(a - b, b);
      return 2 * sq;
    }
    xi = Point(a, b - a);  // (v00, v11, v01): x = v00 + u (1,1) + v (0,1)
    return 2 * sq + 1;
  }

  bool operator==(const FeSpace& o) const { return mesh_ == o.mesh_ && order_ == o.order_; }

 private:
  Mesh mesh_;
  int order_;
  int interior_per_side_ = 0;
  std::size_t ndofs_ = 0;
};

namespace detail {

template <class Local>
SymSparseMatrix assemble_bilinear(const FeSpace& space, int degree, Local&& local) {
  const int dim = space.mesh().dim();
  const auto rq = reference_quadrature(dim, degree);
  const int nl = space.nodes_per_cell();
  std::vector<Triplet> trip;
  trip.reserve(space.mesh().num_cells() * static_cast<std::size_t>(nl * (nl + 1) / 2));
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    Point x0;
    Eigen::Matrix2d J;
    space.cell_geometry(c, x0, J);
    const Eigen::MatrixXd Jd = J.topLeftCorner(dim, dim);
    const double detJ = std::abs(Jd.determinant());
    const Eigen::MatrixXd Jinv = Jd.inverse();
    Eigen::MatrixXd Ae = Eigen::MatrixXd::Zero(nl, nl);
    for (std::size_t p = 0; p < rq.points.size(); ++p) {
      reference_shape(dim, space.order(), rq.points[p], phi, dphi);
      const Point x = x0 + J * rq.points[p];
      const Eigen::MatrixXd grad = dphi * Jinv;  // rows: physical gradients
      local(x, rq.weights[p] * detJ, phi, grad, Ae);
    }
    const auto dofs = space.cell_dofs(c);
    for (int a = 0; a < nl; ++a)
      for (int b = a; b < nl; ++b) {
        const long da = dofs[static_cast<std::size_t>(a)], db = dofs[static_cast<std::size_t>(b)];
        if (da < 0 || db < 0) continue;
        const double v = Ae(a, b);
        trip.emplace_back(std::min(da, db), std::max(da, db), v);
      }
  }
  return SymSparseMatrix(static_cast<Eigen::Index>(space.num_dofs()), trip);
}

inline void check_hermitian(const Eigen::Matrix2d& m, int dim) {
  if (!m.allFinite()) throw std::invalid_argument("assemble_stiffness: non-finite coefficient");
  if (dim == 2 && std::abs(m(0, 1) - m(1, 0)) > 1e-14 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("assemble_stiffness: coefficient sample is not Hermitian");
}

}  // namespace detail

inline SymSparseMatrix assemble_mass(const FeSpace& space) {
  return detail::assemble_bilinear(space, 2 * space.order(),
                                   [](const Point&, double w, const Eigen::VectorXd& phi, const Eigen::MatrixXd&,
                                      Eigen::MatrixXd& Ae) {
                                     for (Eigen::Index a = 0; a < phi.size(); ++a)
                                       for (Eigen::Index b = a; b < phi.size(); ++b) Ae(a, b) += w * phi(a) * phi(b);
                                   });
}

/// K_ij = int M(x) grad phi_j . grad phi_i. The element rule is exact for
/// degree 2 * order, i.e. for coefficients of degree <= 2 in P1 and P2.
inline SymSparseMatrix assemble_stiffness(const FeSpace& space, const SpatialCoefficient& coeff, int degree = -1) {
  const int dim = space.mesh().dim();
  if (degree < 0) degree = 2 * space.order();
  return detail::assemble_bilinear(space, degree,
                                   [&](const Point& x, double w, const Eigen::VectorXd&, const Eigen::MatrixXd& grad,
                                       Eigen::MatrixXd& Ae) {
                                     const Eigen::Matrix2d m = coeff(x);
                                     detail::check_hermitian(m, dim);
                                     const Eigen::MatrixXd md = m.topLeftCorner(dim, dim);
                                     const Eigen::MatrixXd mg = grad * md;  // (M grad phi_a)^T rows, M symmetric
                                     for (Eigen::Index a = 0; a < grad.rows(); ++a)
                                       for (Eigen::Index b = a; b < grad.rows(); ++b)
                                         Ae(a, b) += w * mg.row(a).dot(grad.row(b));
                                   });
}

inline SpatialCoefficient identity_coefficient() {
  return [](const Point&) { return Eigen::Matrix2d::Identity().eval(); };
}

/// Gram matrix of the H^1_0 seminorm (identity coefficient).
inline SymSparseMatrix h1_gram(const FeSpace& space) { return assemble_stiffness(space, identity_coefficient()); }

inline Eigen::VectorXd load_vector(const FeSpace& space, const SpatialFunction& f, int degree = -1) {
  const int dim = space.mesh().dim();
  if (degree < 0) degree = 2 * space.order() + 6;
  const auto rq = reference_quadrature(dim, degree);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    Point x0;
    Eigen::Matrix2d J;
    space.cell_geometry(c, x0, J);
    const double detJ = std::abs(J.topLeftCorner(dim, dim).determinant());
    const auto dofs = space.cell_dofs(c);
    for (std::size_t p = 0; p < rq.points.size(); ++p) {
      reference_shape(dim, space.order(), rq.points[p], phi, dphi);
      const double fx = f(x0 + J * rq.points[p]) * rq.weights[p] * detJ;
      for (std::size_t a = 0; a < dofs.size(); ++a)
        if (dofs[a] >= 0) b(dofs[a]) += fx * phi(static_cast<Eigen::Index>(a));
    }
  }
  return b;
}

/// L2-orthogonal projection onto the space: solves M u = (f, phi_i).
inline Eigen::VectorXd l2_project(const FeSpace& space, const SpatialFunction& f, int degree = -1) {
  const SymmetricSolver solver(assemble_mass(space).matrix());
  return solver.solve(load_vector(space, f, degree));
}

/// Galerkin solution of -div(M grad u) = rhs, u = 0 on the boundary.
inline Eigen::VectorXd stationary_solve(const FeSpace& space, const SpatialCoefficient& coeff,
                                        const SpatialFunction& rhs) {
  const SymmetricSolver solver(assemble_stiffness(space, coeff).matrix());
  return solver.solve(load_vector(space, rhs));
}

inline double evaluate(const FeSpace& space, const Eigen::VectorXd& u, const Point& x) {
  Point xi;
  const std::size_t c = space.locate(x, xi);
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  reference_shape(space.mesh().dim(), space.order(), xi, phi, dphi);
  const auto dofs = space.cell_dofs(c);
  double s = 0.0;
  for (std::size_t a = 0; a < dofs.size(); ++a)
    if (dofs[a] >= 0) s += u(dofs[a]) * phi(static_cast<Eigen::Index>(a));
  return s;
}

/// Whether every function of `coarse` lies in `fine` (nested meshes, order not lower).
inline bool is_nested(const FeSpace& coarse, const FeSpace& fine) {
  return coarse.mesh().dim() == fine.mesh().dim() && fine.order() >= coarse.order() &&
         fine.mesh().cells_per_side() % coarse.mesh().cells_per_side() == 0;
}

/// Nodal interpolation of a coarse function into a nested fine space (exact).
inline Eigen::VectorXd prolongate(const FeSpace& coarse, const FeSpace& fine, const Eigen::VectorXd& u) {
  if (!is_nested(coarse, fine)) throw std::invalid_argument("prolongate: spaces are not nested");
  if (u.size() != static_cast<Eigen::Index>(coarse.num_dofs()))
    throw std::invalid_argument("prolongate: vector does not match the coarse space");
  if (coarse == fine) return u;
  const auto pts = fine.dof_coordinates();
  Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) out(static_cast<Eigen::Index>(i)) = evaluate(coarse, u, pts[i]);
  return out;
}

/// Sparse prolongation matrix P with prolongate(u) = P u.
inline SparseMatrix prolongation_matrix(const FeSpace& coarse, const FeSpace& fine) {
  if (!is_nested(coarse, fine)) throw std::invalid_argument("prolongation_matrix: spaces are not nested");
  const auto pts = fine.dof_coordinates();
  std::vector<Triplet> t;
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Point xi;
    const std::size_t c = coarse.locate(pts[i], xi);
    reference_shape(coarse.mesh().dim(), coarse.order(), xi, phi, dphi);
    const auto dofs = coarse.cell_dofs(c);
    for (std::size_t a = 0; a < dofs.size(); ++a)
      if (dofs[a] >= 0 && std::abs(phi(static_cast<Eigen::Index>(a))) > 1e-15)
        t.emplace_back(static_cast<Eigen::Index>(i), dofs[a], phi(static_cast<Eigen::Index>(a)));
  }
  SparseMatrix P(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(coarse.num_dofs()));
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

/// || u_h - f ||_{L2} by element quadrature of the given degree.
inline double l2_error(const FeSpace& space, const Eigen::VectorXd& u, const SpatialFunction& f, int degree = -1) {
  const int dim = space.mesh().dim();
  if (degree < 0) degree = 2 * space.order() + 8;
  const auto rq = reference_quadrature(dim, degree);
  double acc = 0.0;
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    Point x0;
    Eigen::Matrix2d J;
    space.cell_geometry(c, x0, J);
    const double detJ = std::abs(J.topLeftCorner(dim, dim).determinant());
    const auto dofs = space.cell_dofs(c);
    for (std::size_t p = 0; p < rq.points.size(); ++p) {
      reference_shape(dim, space.order(), rq.points[p], phi, dphi);
      double uh = 0.0;
      for (std::size_t a = 0; a < dofs.size(); ++a)
        if (dofs[a] >= 0) uh += u(dofs[a]) * phi(static_cast<Eigen::Index>(a));
      const double e = uh - f(x0 + J * rq.points[p]);
      acc += rq.weights[p] * detJ * e * e;
    }
  }
  return std::sqrt(acc);
}

inline double mass_norm(const SymSparseMatrix& M, const Eigen::VectorXd& u) {
  return std::sqrt(std::max(0.0, u.dot(M.matrix() * u)));
}

}  // namespace sgfem
