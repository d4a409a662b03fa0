#pragma once

/// Reference elements on the unit square, built as the dual basis of their
/// degree-of-freedom functionals.
///
/// Families (tensor-product construction):
///   DG0    scalar constants, one interior point value
///   CG1    bilinear Q1, vertex values
///   CG2    biquadratic Q2, vertex + edge-midpoint + centre values
///   RTcf1  Q_{1,0} x Q_{0,1}, one normal moment per edge      (H(div))
///   RTcf2  Q_{2,1} x Q_{1,2}, two normal moments per edge + 4 (H(div))
///   RTce2  Q_{1,2} x Q_{2,1}, two tangential moments per edge + 4 (H(curl))
///
/// Edge moments are taken against shifted Legendre polynomials in the CCW
/// traversal parameter, so a moment of degree q flips sign as (-1)^q under
/// reversal. The basis is recovered by inverting the functional/prime-basis
/// Vandermonde matrix, which makes Kronecker duality hold by construction.
/// DG1 is CG1 on a broken (cell-local) space; likewise the hatted broken
/// spaces reuse these elements.

#include <vector>

#include "vtm/core.hpp"
#include "vtm/mesh.hpp"
#include "vtm/quadrature.hpp"

namespace vtm {

enum class Family { DG0, CG1, CG2, RTcf1, RTcf2, RTce2 };

enum class PiolaMap { none, contravariant, covariant };

struct DofInfo {
  enum class Entity { vertex, edge, interior };
  Entity entity;
  int index;  // vertex or edge number; 0 for interior
  int moment; // Legendre degree of an edge moment; ordinal otherwise
};

/// Dense tabulation of all basis functions at a set of reference points.
/// Component-major layout; scalar elements use n_comp = 1.
struct Tabulation {
  int n_dofs = 0, n_pts = 0, n_comp = 1;
  std::vector<double> value; // [(i*n_pts + q)*n_comp + c]
  std::vector<double> grad;  // [((i*n_pts + q)*n_comp + c)*2 + a], d/dxi_a
  std::vector<double> hess;  // [...*3 + h], h in {xx, xy, yy}

  double v(int i, int q, int c = 0) const {
    return value[(i * n_pts + q) * n_comp + c];
  }
  double dv(int i, int q, int c, int a) const {
    return grad[((i * n_pts + q) * n_comp + c) * 2 + a];
  }
  double d2v(int i, int q, int c, int a, int b) const {
    int h = (a == 0 && b == 0) ? 0 : (a == 1 && b == 1) ? 2 : 1;
    return hess[((i * n_pts + q) * n_comp + c) * 3 + h];
  }
};

class ReferenceElement {
 public:
  struct Term {
    int comp, px, py;
  };

  Family family;
  PiolaMap map = PiolaMap::none;
  int n_comp = 1;
  std::vector<DofInfo> dofs;

  int n_dofs() const { return static_cast<int>(dofs.size()); }

  explicit ReferenceElement(Family f) : family(f) {
    switch (f) {
      case Family::DG0:
        prime_ = {{0, 0, 0}};
        dofs = {{DofInfo::Entity::interior, 0, 0}};
        break;
      case Family::CG1:
        for (int py = 0; py <= 1; ++py)
          for (int px = 0; px <= 1; ++px) prime_.push_back({0, px, py});
        for (int v = 0; v < 4; ++v) dofs.push_back({DofInfo::Entity::vertex, v, 0});
        break;
      case Family::CG2:
        for (int py = 0; py <= 2; ++py)
          for (int px = 0; px <= 2; ++px) prime_.push_back({0, px, py});
        for (int v = 0; v < 4; ++v) dofs.push_back({DofInfo::Entity::vertex, v, 0});
        for (int e = 0; e < 4; ++e) dofs.push_back({DofInfo::Entity::edge, e, 0});
        dofs.push_back({DofInfo::Entity::interior, 0, 0});
        break;
      case Family::RTcf1:
        map = PiolaMap::contravariant;
        n_comp = 2;
        add_tensor_terms(0, 1, 0);
        add_tensor_terms(1, 0, 1);
        for (int e = 0; e < 4; ++e) dofs.push_back({DofInfo::Entity::edge, e, 0});
        break;
      case Family::RTcf2:
        map = PiolaMap::contravariant;
        n_comp = 2;
        add_tensor_terms(0, 2, 1);
        add_tensor_terms(1, 1, 2);
        for (int e = 0; e < 4; ++e)
          for (int q = 0; q < 2; ++q) dofs.push_back({DofInfo::Entity::edge, e, q});
        for (int k = 0; k < 4; ++k) dofs.push_back({DofInfo::Entity::interior, 0, k});
        break;
      case Family::RTce2:
        map = PiolaMap::covariant;
        n_comp = 2;
        add_tensor_terms(0, 1, 2);
        add_tensor_terms(1, 2, 1);
        for (int e = 0; e < 4; ++e)
          for (int q = 0; q < 2; ++q) dofs.push_back({DofInfo::Entity::edge, e, q});
        for (int k = 0; k < 4; ++k) dofs.push_back({DofInfo::Entity::interior, 0, k});
        break;
    }
    build_dual_basis();
  }

  /// Apply DoF functional k to an arbitrary (vector of) reference function,
  /// supplied as callables value(x) -> Eigen vector of size n_comp.
  template <class F>
  double apply_dof(int k, F&& fn) const {
    return functional(dofs[k], std::forward<F>(fn), gauss_legendre(8),
                      tensor_gauss(14));
  }

  Tabulation tabulate(const std::vector<Vec2>& pts, bool with_hess = false) const {
    Tabulation tab;
    tab.n_dofs = n_dofs();
    tab.n_pts = static_cast<int>(pts.size());
    tab.n_comp = n_comp;
    int n = tab.n_dofs * tab.n_pts * tab.n_comp;
    tab.value.assign(n, 0.0);
    tab.grad.assign(2 * n, 0.0);
    if (with_hess) tab.hess.assign(3 * n, 0.0);

    int np = static_cast<int>(prime_.size());
    for (int q = 0; q < tab.n_pts; ++q) {
      double x = pts[q][0], y = pts[q][1];
      for (int j = 0; j < np; ++j) {
        const Term& t = prime_[j];
        double mx = ipow(x, t.px), my = ipow(y, t.py);
        double dmx = t.px ? t.px * ipow(x, t.px - 1) : 0.0;
        double dmy = t.py ? t.py * ipow(y, t.py - 1) : 0.0;
        double d2mx = t.px > 1 ? t.px * (t.px - 1) * ipow(x, t.px - 2) : 0.0;
        double d2my = t.py > 1 ? t.py * (t.py - 1) * ipow(y, t.py - 2) : 0.0;
        for (int i = 0; i < tab.n_dofs; ++i) {
          double w = coef_(i, j);
          if (w == 0.0) continue;
          int base = (i * tab.n_pts + q) * n_comp + t.comp;
          tab.value[base] += w * mx * my;
          tab.grad[base * 2 + 0] += w * dmx * my;
          tab.grad[base * 2 + 1] += w * mx * dmy;
          if (with_hess) {
            tab.hess[base * 3 + 0] += w * d2mx * my;
            tab.hess[base * 3 + 1] += w * dmx * dmy;
            tab.hess[base * 3 + 2] += w * mx * d2my;
          }
        }
      }
    }
    return tab;
  }

 private:
  std::vector<Term> prime_;
  Eigen::MatrixXd coef_;

  static double ipow(double x, int p) {
    double r = 1.0;
    for (int k = 0; k < p; ++k) r *= x;
    return r;
  }

  void add_tensor_terms(int comp, int degx, int degy) {
    for (int py = 0; py <= degy; ++py)
      for (int px = 0; px <= degx; ++px) prime_.push_back({comp, px, py});
  }

  static Vec2 vertex_point(int v) {
    switch (v) {
      case 0: return {0, 0};
      case 1: return {1, 0};
      case 2: return {1, 1};
      default: return {0, 1};
    }
  }

  template <class F>
  double functional(const DofInfo& dof, F&& fn, const QuadratureRule1D& line,
                    const QuadratureRule2D& area) const {
    if (n_comp == 1) {
      // point values
      Vec2 p;
      if (dof.entity == DofInfo::Entity::vertex) p = vertex_point(dof.index);
      else if (dof.entity == DofInfo::Entity::edge) p = edge_point(dof.index, 0.5);
      else p = {0.5, 0.5};
      return fn(p)(0);
    }
    if (dof.entity == DofInfo::Entity::edge) {
      Vec2 dir = (map == PiolaMap::contravariant)
                     ? edge_ref_normal(dof.index)
                     : edge_ref_tangent(dof.index);
      double acc = 0.0;
      for (size_t q = 0; q < line.points.size(); ++q) {
        double s = line.points[q];
        double leg = (dof.moment == 0) ? 1.0 : 2.0 * s - 1.0;
        Eigen::Vector2d v = fn(edge_point(dof.index, s));
        acc += line.weights[q] * leg * (v[0] * dir[0] + v[1] * dir[1]);
      }
      return acc;
    }
    // interior moments: component against {1, x} or {1, y}
    int comp, px = 0, py = 0;
    if (map == PiolaMap::contravariant) {
      // RTcf2: e_x against {1, y}; e_y against {1, x}
      comp = dof.moment / 2;
      if (dof.moment == 1) py = 1;
      if (dof.moment == 3) px = 1;
    } else {
      // RTce2: e_x against {1, x}; e_y against {1, y}
      comp = dof.moment / 2;
      if (dof.moment == 1) px = 1;
      if (dof.moment == 3) py = 1;
    }
    double acc = 0.0;
    for (int q = 0; q < area.size(); ++q) {
      const Vec2& p = area.points[q];
      Eigen::Vector2d v = fn(p);
      acc += area.weights[q] * v[comp] * ipow(p[0], px) * ipow(p[1], py);
    }
    return acc;
  }

  void build_dual_basis() {
    int n = n_dofs();
    require(static_cast<int>(prime_.size()) == n,
            "element: functional count must match prime basis dimension");
    QuadratureRule1D line = gauss_legendre(6);
    QuadratureRule2D area = tensor_gauss(10);
    Eigen::MatrixXd V(n, n); // V(k, j) = functional_k(prime_j)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        const Term& t = prime_[j];
        auto fn = [&](const Vec2& p) {
          Eigen::Vector2d v = Eigen::Vector2d::Zero();
          v[t.comp] = ipow(p[0], t.px) * ipow(p[1], t.py);
          return v;
        };
        V(k, j) = functional(dofs[k], fn, line, area);
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    require(lu.isInvertible(), "element: functionals are not unisolvent");
    coef_ = lu.inverse().transpose();
  }
};

/// Shared element cache (elements are immutable once built).
inline const ReferenceElement& element(Family f) {
  static const ReferenceElement dg0(Family::DG0);
  static const ReferenceElement cg1(Family::CG1);
  static const ReferenceElement cg2(Family::CG2);
  static const ReferenceElement rtcf1(Family::RTcf1);
  static const ReferenceElement rtcf2(Family::RTcf2);
  static const ReferenceElement rtce2(Family::RTce2);
  switch (f) {
    case Family::DG0: return dg0;
    case Family::CG1: return cg1;
    case Family::CG2: return cg2;
    case Family::RTcf1: return rtcf1;
    case Family::RTcf2: return rtcf2;
    default: return rtce2;
  }
}

} // namespace vtm
