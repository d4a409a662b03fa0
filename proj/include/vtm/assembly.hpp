#pragma once

/// Physical-space tabulation and the generic L2 machinery built on it:
/// mass and mixed-mass assembly, Galerkin projection, norms and errors.
///
/// Piola transforms on a cell with Jacobian J, metric G = J^T J, g = det G:
///   scalar          f = f_hat,            grad f = J G^-1 grad_hat f
///   contravariant   v = J v_hat / sqrt(g)   (H(div): normal flux preserved)
///   covariant       v = J G^-1 v_hat        (H(curl): tangential circulation)
/// The contravariant divergence is exact: div v = (div_hat v_hat) / sqrt(g).
/// First and second reference partials of contravariant values are carried
/// through the product rule; dJ is constant and d2J = 0 for bilinear cells,
/// so only derivatives of 1/sqrt(g) enter beyond the reference tabulation.

#include <array>
#include <functional>
#include <vector>

#include "vtm/core.hpp"
#include "vtm/element.hpp"
#include "vtm/geometry.hpp"
#include "vtm/mesh.hpp"
#include "vtm/quadrature.hpp"
#include "vtm/solvers.hpp"
#include "vtm/space.hpp"

namespace vtm {

using ScalarFn = std::function<double(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;

/// Geometry at the quadrature points of one cell; w includes sqrt(g).
struct CellQuad {
  int nq = 0;
  std::vector<Vec3> x;
  std::vector<double> w;
  std::vector<CellGeom> geom;
};

inline CellQuad cell_quad(const Mesh& mesh, index_t cell,
                          const QuadratureRule2D& rule) {
  BilinearCell bc = BilinearCell::from_corners(mesh.cell_coords[cell]);
  CellQuad cq;
  cq.nq = rule.size();
  cq.x.resize(cq.nq);
  cq.w.resize(cq.nq);
  cq.geom.resize(cq.nq);
  for (int q = 0; q < cq.nq; ++q) {
    cq.geom[q] = cell_geom(bc, rule.points[q]);
    cq.x[q] = bc.map(rule.points[q]);
    cq.w[q] = rule.weights[q] * cq.geom[q].sqrtg;
  }
  return cq;
}

inline std::vector<CellGeom> cell_geometry_at(const Mesh& mesh, index_t cell,
                                              const std::vector<Vec2>& pts) {
  BilinearCell bc = BilinearCell::from_corners(mesh.cell_coords[cell]);
  std::vector<CellGeom> out(pts.size());
  for (size_t q = 0; q < pts.size(); ++q) out[q] = cell_geom(bc, pts[q]);
  return out;
}

/// Reference components G^-1 J^T v of the tangential part of a 3-vector.
inline Vec2 pullback_tangent(const CellGeom& g, const Vec3& v) {
  return g.Ginv * (g.J.transpose() * v);
}

/// In-plane rotation by the manifold normal.
inline Vec3 perp(const CellGeom& g, const Vec3& v) { return g.N.cross(v); }

/// N . curl X of a tangent field from its reference partials:
/// N . curl X = (j2 . dX/dxi - j1 . dX/deta) / sqrt(g).
inline double curl_n(const CellGeom& g, const Vec3& dX0, const Vec3& dX1) {
  return (g.J.col(1).dot(dX0) - g.J.col(0).dot(dX1)) / g.sqrtg;
}

/// Scalar basis on one cell: values, reference and tangential gradients.
struct PhysScalar {
  int nd = 0, nq = 0;
  std::vector<double> val;  // [q * nd + i]
  std::vector<Vec2> rgrad;
  std::vector<Vec3> tgrad;

  double v(int q, int i) const { return val[q * nd + i]; }
  const Vec2& rg(int q, int i) const { return rgrad[q * nd + i]; }
  const Vec3& tg(int q, int i) const { return tgrad[q * nd + i]; }
};

inline PhysScalar phys_scalar(const ReferenceElement& elem,
                              const std::vector<Vec2>& pts,
                              const std::vector<CellGeom>& geom) {
  require(elem.n_comp == 1, "phys_scalar: vector element");
  Tabulation tab = elem.tabulate(pts);
  PhysScalar out;
  out.nd = elem.n_dofs();
  out.nq = static_cast<int>(pts.size());
  out.val.resize(out.nd * out.nq);
  out.rgrad.resize(out.nd * out.nq);
  out.tgrad.resize(out.nd * out.nq);
  for (int q = 0; q < out.nq; ++q) {
    Mat32 JGinv = geom[q].J * geom[q].Ginv;
    for (int i = 0; i < out.nd; ++i) {
      Vec2 rg(tab.dv(i, q, 0, 0), tab.dv(i, q, 0, 1));
      out.val[q * out.nd + i] = tab.v(i, q);
      out.rgrad[q * out.nd + i] = rg;
      out.tgrad[q * out.nd + i] = JGinv * rg;
    }
  }
  return out;
}

/// Vector basis on one cell. Contravariant elements carry the exact surface
/// divergence and, on request, first and second reference partials of the
/// physical values. Covariant elements tabulate values only.
struct PhysVector {
  int nd = 0, nq = 0;
  bool with_d1 = false, with_d2 = false;
  std::vector<Vec3> val;  // [q * nd + i]
  std::vector<double> div;
  std::vector<Vec3> d1;  // [(q * nd + i) * 2 + a]
  std::vector<Vec3> d2;  // [(q * nd + i) * 3 + h], h in {xx, xy, yy}

  const Vec3& v(int q, int i) const { return val[q * nd + i]; }
  double dv(int q, int i) const { return div[q * nd + i]; }
  const Vec3& d(int q, int i, int a) const {
    return d1[(q * nd + i) * 2 + a];
  }
  const Vec3& dd(int q, int i, int h) const {
    return d2[(q * nd + i) * 3 + h];
  }
};

inline PhysVector phys_vector(const ReferenceElement& elem,
                              const std::vector<Vec2>& pts,
                              const std::vector<CellGeom>& geom,
                              bool want_d1 = false, bool want_d2 = false) {
  require(elem.n_comp == 2, "phys_vector: scalar element");
  PhysVector out;
  out.nd = elem.n_dofs();
  out.nq = static_cast<int>(pts.size());
  out.with_d1 = want_d1 || want_d2;
  out.with_d2 = want_d2;
  out.val.resize(out.nd * out.nq);

  if (elem.map == PiolaMap::covariant) {
    require(!want_d1 && !want_d2,
            "phys_vector: covariant derivatives not supported");
    Tabulation tab = elem.tabulate(pts);
    for (int q = 0; q < out.nq; ++q) {
      Mat32 JGinv = geom[q].J * geom[q].Ginv;
      for (int i = 0; i < out.nd; ++i)
        out.val[q * out.nd + i] =
            JGinv * Vec2(tab.v(i, q, 0), tab.v(i, q, 1));
    }
    return out;
  }

  Tabulation tab = elem.tabulate(pts, out.with_d2);
  out.div.resize(out.nd * out.nq);
  if (out.with_d1) out.d1.resize(out.nd * out.nq * 2);
  if (out.with_d2) out.d2.resize(out.nd * out.nq * 3);

  for (int q = 0; q < out.nq; ++q) {
    const CellGeom& g = geom[q];
    double s = 1.0 / g.sqrtg;
    double ds[2], d2s[2][2];
    for (int a = 0; a < 2; ++a) ds[a] = -0.5 * s * g.dg[a] / g.detG;
    if (out.with_d2) {
      double t32 = s / g.detG, t52 = t32 / g.detG;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          d2s[a][b] = 0.75 * t52 * g.dg[a] * g.dg[b] -
                      0.5 * t32 * g.d2g[a][b];
    }
    for (int i = 0; i < out.nd; ++i) {
      Vec2 vh(tab.v(i, q, 0), tab.v(i, q, 1));
      Vec2 dvh[2];
      for (int a = 0; a < 2; ++a)
        dvh[a] = Vec2(tab.dv(i, q, 0, a), tab.dv(i, q, 1, a));
      out.val[q * out.nd + i] = g.J * vh * s;
      out.div[q * out.nd + i] = (dvh[0][0] + dvh[1][1]) * s;
      if (!out.with_d1) continue;
      Vec3 Jvh = g.J * vh;
      Vec3 A[2];
      for (int a = 0; a < 2; ++a) {
        A[a] = g.dJ[a] * vh + g.J * dvh[a];
        out.d1[(q * out.nd + i) * 2 + a] = s * A[a] + ds[a] * Jvh;
      }
      if (!out.with_d2) continue;
      for (int h = 0; h < 3; ++h) {
        int a = (h == 0) ? 0 : (h == 2) ? 1 : 0;
        int b = (h == 0) ? 0 : (h == 2) ? 1 : 1;
        Vec2 d2vh(tab.d2v(i, q, 0, a, b), tab.d2v(i, q, 1, a, b));
        Vec3 dbA = g.dJ[a] * dvh[b] + g.dJ[b] * dvh[a] + g.J * d2vh;
        out.d2[(q * out.nd + i) * 3 + h] = ds[b] * A[a] + s * dbA +
                                           d2s[a][b] * Jvh +
                                           ds[a] * (g.dJ[b] * vh + g.J * dvh[b]);
      }
    }
  }
  return out;
}

/// A vector field evaluated at the tabulation points of one cell.
struct VecFieldCell {
  std::vector<Vec3> val;
  std::vector<double> div;
  std::vector<Vec3> d1;  // [q * 2 + a]
  std::vector<Vec3> d2;  // [q * 3 + h]
};

inline VecFieldCell eval_vector_field(const PhysVector& T,
                                      const Eigen::VectorXd& lc) {
  VecFieldCell out;
  out.val.assign(T.nq, Vec3::Zero());
  if (!T.div.empty()) out.div.assign(T.nq, 0.0);
  if (T.with_d1) out.d1.assign(T.nq * 2, Vec3::Zero());
  if (T.with_d2) out.d2.assign(T.nq * 3, Vec3::Zero());
  for (int q = 0; q < T.nq; ++q)
    for (int i = 0; i < T.nd; ++i) {
      double c = lc[i];
      if (c == 0.0) continue;
      out.val[q] += c * T.v(q, i);
      if (!T.div.empty()) out.div[q] += c * T.dv(q, i);
      if (T.with_d1)
        for (int a = 0; a < 2; ++a) out.d1[q * 2 + a] += c * T.d(q, i, a);
      if (T.with_d2)
        for (int h = 0; h < 3; ++h) out.d2[q * 3 + h] += c * T.dd(q, i, h);
    }
  return out;
}

/// A scalar field evaluated at the tabulation points of one cell.
struct ScalFieldCell {
  std::vector<double> val;
  std::vector<Vec2> rgrad;
  std::vector<Vec3> tgrad;
};

inline ScalFieldCell eval_scalar_field(const PhysScalar& T,
                                       const Eigen::VectorXd& lc) {
  ScalFieldCell out;
  out.val.assign(T.nq, 0.0);
  out.rgrad.assign(T.nq, Vec2::Zero());
  out.tgrad.assign(T.nq, Vec3::Zero());
  for (int q = 0; q < T.nq; ++q)
    for (int i = 0; i < T.nd; ++i) {
      double c = lc[i];
      if (c == 0.0) continue;
      out.val[q] += c * T.val[q * T.nd + i];
      out.rgrad[q] += c * T.rgrad[q * T.nd + i];
      out.tgrad[q] += c * T.tgrad[q * T.nd + i];
    }
  return out;
}

/// Point evaluation (diagnostics and output; not a hot path).
inline Vec3 eval_vector_at(const Field& u, index_t cell, const Vec2& xi) {
  const FunctionSpace& V = *u.space;
  std::vector<Vec2> pts = {xi};
  std::vector<CellGeom> g = cell_geometry_at(*V.mesh, cell, pts);
  PhysVector T = phys_vector(*V.elem, pts, g);
  Eigen::VectorXd lc = local_coeffs(u, cell);
  Vec3 v = Vec3::Zero();
  for (int i = 0; i < T.nd; ++i) v += lc[i] * T.v(0, i);
  return v;
}

inline double eval_scalar_at(const Field& u, index_t cell, const Vec2& xi) {
  const FunctionSpace& V = *u.space;
  std::vector<Vec2> pts = {xi};
  std::vector<CellGeom> g = cell_geometry_at(*V.mesh, cell, pts);
  PhysScalar T = phys_scalar(*V.elem, pts, g);
  Eigen::VectorXd lc = local_coeffs(u, cell);
  double v = 0.0;
  for (int i = 0; i < T.nd; ++i) v += lc[i] * T.val[i];
  return v;
}

/// Reference tabulations along cell edges at facet quadrature points, for
/// both traversal directions ((+) side uses s, (-) side 1-s), cached once
/// per assembly pass.
struct FacetTabCache {
  std::array<std::array<Tabulation, 4>, 2> tab;  // [side][local edge]

  const Tabulation& at(int side, int edge) const { return tab[side][edge]; }
};

inline FacetTabCache build_facet_tabs(const ReferenceElement& elem,
                                      const QuadratureRule1D& rule,
                                      bool with_hess = false) {
  FacetTabCache cache;
  int nq = static_cast<int>(rule.points.size());
  for (int side = 0; side < 2; ++side)
    for (int e = 0; e < 4; ++e) {
      std::vector<Vec2> pts(nq);
      for (int q = 0; q < nq; ++q) {
        double s = side == 0 ? rule.points[q] : 1.0 - rule.points[q];
        pts[q] = edge_point(e, s);
      }
      cache.tab[side][e] = elem.tabulate(pts, with_hess);
    }
  return cache;
}

/// Contravariant Piola value of reference basis i at tabulation point q.
inline Vec3 contravariant_value(const Tabulation& tab, const CellGeom& g,
                                int i, int q) {
  return g.J * Vec2(tab.v(i, q, 0), tab.v(i, q, 1)) / g.sqrtg;
}

namespace detail {

inline void scatter(Triplets& t, const FunctionSpace& Vt,
                    const FunctionSpace& Vu, index_t cell,
                    const Eigen::MatrixXd& local) {
  for (int i = 0; i < local.rows(); ++i)
    for (int j = 0; j < local.cols(); ++j) {
      double v = Vt.sign(cell, i) * Vu.sign(cell, j) * local(i, j);
      t.add(Vt.dof(cell, i), Vu.dof(cell, j), v);
    }
}

} // namespace detail

constexpr int kDefaultQuadDegree = 8;

/// Mass matrix between two spaces over the same mesh (equal spaces give the
/// standard SPD mass matrix).
inline SparseMatrix assemble_mixed_mass(const FunctionSpace& Vt,
                                        const FunctionSpace& Vu,
                                        int quad_degree = kDefaultQuadDegree) {
  require(Vt.mesh == Vu.mesh, "mixed mass: different meshes");
  require((Vt.elem->n_comp == 2) == (Vu.elem->n_comp == 2),
          "mixed mass: scalar/vector mismatch");
  bool vec = Vt.elem->n_comp == 2;
  QuadratureRule2D rule = tensor_gauss(quad_degree);
  Triplets t(Vt.n_dofs, Vu.n_dofs);
  const Mesh& mesh = *Vt.mesh;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, rule);
    Eigen::MatrixXd local =
        Eigen::MatrixXd::Zero(Vt.n_local(), Vu.n_local());
    if (vec) {
      PhysVector Tt = phys_vector(*Vt.elem, rule.points, cq.geom);
      PhysVector Tu_other;
      if (Vt.elem != Vu.elem)
        Tu_other = phys_vector(*Vu.elem, rule.points, cq.geom);
      const PhysVector& Tu = (Vt.elem == Vu.elem) ? Tt : Tu_other;
      for (int q = 0; q < cq.nq; ++q)
        for (int i = 0; i < Tt.nd; ++i)
          for (int j = 0; j < Tu.nd; ++j)
            local(i, j) += cq.w[q] * Tt.v(q, i).dot(Tu.v(q, j));
    } else {
      PhysScalar Tt = phys_scalar(*Vt.elem, rule.points, cq.geom);
      PhysScalar Tu_other;
      if (Vt.elem != Vu.elem)
        Tu_other = phys_scalar(*Vu.elem, rule.points, cq.geom);
      const PhysScalar& Tu = (Vt.elem == Vu.elem) ? Tt : Tu_other;
      for (int q = 0; q < cq.nq; ++q)
        for (int i = 0; i < Tt.nd; ++i)
          for (int j = 0; j < Tu.nd; ++j)
            local(i, j) += cq.w[q] * Tt.v(q, i) * Tu.v(q, j);
    }
    detail::scatter(t, Vt, Vu, c, local);
  }
  return SparseMatrix::from_triplets(t);
}

inline SparseMatrix assemble_mass(const FunctionSpace& V,
                                  int quad_degree = kDefaultQuadDegree) {
  return assemble_mixed_mass(V, V, quad_degree);
}

/// L2 right-hand side against an analytic function.
inline Eigen::VectorXd assemble_rhs(const FunctionSpace& V, const VectorFn& f,
                                    int quad_degree = kDefaultQuadDegree) {
  require(V.elem->n_comp == 2, "rhs: vector function on scalar space");
  QuadratureRule2D rule = tensor_gauss(quad_degree);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(V.n_dofs);
  const Mesh& mesh = *V.mesh;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, rule);
    PhysVector T = phys_vector(*V.elem, rule.points, cq.geom);
    for (int q = 0; q < cq.nq; ++q) {
      Vec3 fx = f(cq.x[q]);
      for (int i = 0; i < T.nd; ++i)
        b[V.dof(c, i)] += V.sign(c, i) * cq.w[q] * T.v(q, i).dot(fx);
    }
  }
  return b;
}

inline Eigen::VectorXd assemble_rhs(const FunctionSpace& V, const ScalarFn& f,
                                    int quad_degree = kDefaultQuadDegree) {
  require(V.elem->n_comp == 1, "rhs: scalar function on vector space");
  QuadratureRule2D rule = tensor_gauss(quad_degree);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(V.n_dofs);
  const Mesh& mesh = *V.mesh;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, rule);
    PhysScalar T = phys_scalar(*V.elem, rule.points, cq.geom);
    for (int q = 0; q < cq.nq; ++q) {
      double fx = f(cq.x[q]);
      for (int i = 0; i < T.nd; ++i)
        b[V.dof(c, i)] += V.sign(c, i) * cq.w[q] * T.v(q, i) * fx;
    }
  }
  return b;
}

/// Galerkin projections (direct mass solve; setup-time operations).
inline Field project(const FunctionSpace& V, const VectorFn& f,
                     int quad_degree = kDefaultQuadDegree) {
  SparseMatrix M = assemble_mass(V, quad_degree);
  DirectFactorization fac(M, true);
  return Field(V, fac.solve(assemble_rhs(V, f, quad_degree)));
}

inline Field project(const FunctionSpace& V, const ScalarFn& f,
                     int quad_degree = kDefaultQuadDegree) {
  SparseMatrix M = assemble_mass(V, quad_degree);
  DirectFactorization fac(M, true);
  return Field(V, fac.solve(assemble_rhs(V, f, quad_degree)));
}

/// Project a field into another space over the same mesh.
inline Field project_field(const FunctionSpace& V, const Field& u,
                           int quad_degree = kDefaultQuadDegree) {
  const FunctionSpace& W = *u.space;
  require(V.mesh == W.mesh, "project_field: different meshes");
  require((V.elem->n_comp == 2) == (W.elem->n_comp == 2),
          "project_field: scalar/vector mismatch");
  SparseMatrix B = assemble_mixed_mass(V, W, quad_degree);
  SparseMatrix M = assemble_mass(V, quad_degree);
  DirectFactorization fac(M, true);
  return Field(V, fac.solve(B * u.coeffs));
}

/// Quadrature L2 norms, errors and integrals.
namespace detail {

template <class CellTerm>
double accumulate(const Mesh& mesh, int quad_degree, CellTerm&& term) {
  QuadratureRule2D rule = tensor_gauss(quad_degree);
  double acc = 0.0;
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, rule);
    acc += term(c, rule, cq);
  }
  return acc;
}

} // namespace detail

inline double l2_norm(const Field& u, int quad_degree = kDefaultQuadDegree) {
  const FunctionSpace& V = *u.space;
  double s = detail::accumulate(
      *V.mesh, quad_degree,
      [&](index_t c, const QuadratureRule2D& rule, const CellQuad& cq) {
        double acc = 0.0;
        Eigen::VectorXd lc = local_coeffs(u, c);
        if (V.elem->n_comp == 2) {
          PhysVector T = phys_vector(*V.elem, rule.points, cq.geom);
          VecFieldCell f = eval_vector_field(T, lc);
          for (int q = 0; q < cq.nq; ++q)
            acc += cq.w[q] * f.val[q].squaredNorm();
        } else {
          PhysScalar T = phys_scalar(*V.elem, rule.points, cq.geom);
          ScalFieldCell f = eval_scalar_field(T, lc);
          for (int q = 0; q < cq.nq; ++q) acc += cq.w[q] * f.val[q] * f.val[q];
        }
        return acc;
      });
  return std::sqrt(s);
}

/// L2 distance between two fields over the same mesh (spaces may differ).
inline double l2_error(const Field& a, const Field& b,
                       int quad_degree = kDefaultQuadDegree) {
  const FunctionSpace& Va = *a.space;
  const FunctionSpace& Vb = *b.space;
  require(Va.mesh == Vb.mesh, "l2_error: different meshes");
  require((Va.elem->n_comp == 2) == (Vb.elem->n_comp == 2),
          "l2_error: scalar/vector mismatch");
  double s = detail::accumulate(
      *Va.mesh, quad_degree,
      [&](index_t c, const QuadratureRule2D& rule, const CellQuad& cq) {
        double acc = 0.0;
        Eigen::VectorXd la = local_coeffs(a, c);
        Eigen::VectorXd lb = local_coeffs(b, c);
        if (Va.elem->n_comp == 2) {
          PhysVector Ta = phys_vector(*Va.elem, rule.points, cq.geom);
          VecFieldCell fa = eval_vector_field(Ta, la);
          PhysVector Tb = phys_vector(*Vb.elem, rule.points, cq.geom);
          VecFieldCell fb = eval_vector_field(Tb, lb);
          for (int q = 0; q < cq.nq; ++q)
            acc += cq.w[q] * (fa.val[q] - fb.val[q]).squaredNorm();
        } else {
          PhysScalar Ta = phys_scalar(*Va.elem, rule.points, cq.geom);
          ScalFieldCell fa = eval_scalar_field(Ta, la);
          PhysScalar Tb = phys_scalar(*Vb.elem, rule.points, cq.geom);
          ScalFieldCell fb = eval_scalar_field(Tb, lb);
          for (int q = 0; q < cq.nq; ++q) {
            double d = fa.val[q] - fb.val[q];
            acc += cq.w[q] * d * d;
          }
        }
        return acc;
      });
  return std::sqrt(s);
}

inline double l2_error(const Field& a, const VectorFn& f,
                       int quad_degree = kDefaultQuadDegree) {
  const FunctionSpace& V = *a.space;
  require(V.elem->n_comp == 2, "l2_error: vector function vs scalar field");
  double s = detail::accumulate(
      *V.mesh, quad_degree,
      [&](index_t c, const QuadratureRule2D& rule, const CellQuad& cq) {
        double acc = 0.0;
        Eigen::VectorXd lc = local_coeffs(a, c);
        PhysVector T = phys_vector(*V.elem, rule.points, cq.geom);
        VecFieldCell fa = eval_vector_field(T, lc);
        for (int q = 0; q < cq.nq; ++q)
          acc += cq.w[q] * (fa.val[q] - f(cq.x[q])).squaredNorm();
        return acc;
      });
  return std::sqrt(s);
}

inline double l2_error(const Field& a, const ScalarFn& f,
                       int quad_degree = kDefaultQuadDegree) {
  const FunctionSpace& V = *a.space;
  require(V.elem->n_comp == 1, "l2_error: scalar function vs vector field");
  double s = detail::accumulate(
      *V.mesh, quad_degree,
      [&](index_t c, const QuadratureRule2D& rule, const CellQuad& cq) {
        double acc = 0.0;
        Eigen::VectorXd lc = local_coeffs(a, c);
        PhysScalar T = phys_scalar(*V.elem, rule.points, cq.geom);
        ScalFieldCell fa = eval_scalar_field(T, lc);
        for (int q = 0; q < cq.nq; ++q) {
          double d = fa.val[q] - f(cq.x[q]);
          acc += cq.w[q] * d * d;
        }
        return acc;
      });
  return std::sqrt(s);
}

/// Integral of a scalar field over the whole manifold.
inline double integral(const Field& u, int quad_degree = kDefaultQuadDegree) {
  const FunctionSpace& V = *u.space;
  require(V.elem->n_comp == 1, "integral: scalar fields only");
  return detail::accumulate(
      *V.mesh, quad_degree,
      [&](index_t c, const QuadratureRule2D& rule, const CellQuad& cq) {
        double acc = 0.0;
        Eigen::VectorXd lc = local_coeffs(u, c);
        PhysScalar T = phys_scalar(*V.elem, rule.points, cq.geom);
        ScalFieldCell f = eval_scalar_field(T, lc);
        for (int q = 0; q < cq.nq; ++q) acc += cq.w[q] * f.val[q];
        return acc;
      });
}

inline double total_area(const Mesh& mesh,
                         int quad_degree = kDefaultQuadDegree) {
  return detail::accumulate(
      mesh, quad_degree,
      [&](index_t, const QuadratureRule2D&, const CellQuad& cq) {
        double acc = 0.0;
        for (int q = 0; q < cq.nq; ++q) acc += cq.w[q];
        return acc;
      });
}

} // namespace vtm
