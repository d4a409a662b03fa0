#pragma once

/// Bilinear cell geometry on embedded surfaces.
///
/// A cell is the bilinear interpolant of its four corners,
///   x(xi,eta) = a + b xi + c eta + d xi eta,
/// with a 3x2 Jacobian J = [b + d eta | c + d xi]. The induced metric is
/// G = J^T J, the area element sqrt(det G), and the unit manifold normal
/// N = j1 x j2 / |j1 x j2|. dJ/dxi and dJ/deta are the constant matrices
/// [0|d] and [d|0], so all metric derivatives below are exact.

#include <array>
#include <cmath>

#include "vtm/core.hpp"
#include "vtm/mesh.hpp"
#include "vtm/quadrature.hpp"

namespace vtm {

struct BilinearCell {
  Vec3 a, b, c, d;

  static BilinearCell from_corners(const std::array<Vec3, 4>& p) {
    return {p[0], p[1] - p[0], p[3] - p[0], p[0] - p[1] + p[2] - p[3]};
  }

  Vec3 map(const Vec2& x) const {
    return a + b * x[0] + c * x[1] + d * (x[0] * x[1]);
  }

  Mat32 jacobian(const Vec2& x) const {
    Mat32 J;
    J.col(0) = b + d * x[1];
    J.col(1) = c + d * x[0];
    return J;
  }
};

/// Metric data at one reference point, with first and second derivatives of
/// the quantities entering Piola transforms.
struct CellGeom {
  Mat32 J;
  Mat2 G, Ginv;
  double detG = 0, sqrtg = 0;
  Vec3 N;            // unit manifold normal, j1 x j2 direction
  Mat32 dJ[2];       // dJ/dxi_a (constant per cell)
  Mat2 dG[2], dGinv[2];
  double dg[2];      // d(det G)/dxi_a
  double d2g[2][2];  // second derivatives of det G

  double dsqrtg(int a) const { return dg[a] / (2.0 * sqrtg); }
};

inline CellGeom cell_geom(const BilinearCell& cell, const Vec2& x) {
  CellGeom geo;
  geo.J = cell.jacobian(x);
  geo.dJ[0].setZero();
  geo.dJ[0].col(1) = cell.d;
  geo.dJ[1].setZero();
  geo.dJ[1].col(0) = cell.d;

  geo.G = geo.J.transpose() * geo.J;
  geo.detG = geo.G.determinant();
  require(geo.detG > 0, "cell_geom: degenerate cell");
  geo.sqrtg = std::sqrt(geo.detG);
  geo.Ginv = geo.G.inverse();

  Vec3 cross = geo.J.col(0).cross(geo.J.col(1));
  geo.N = cross / cross.norm();

  for (int a = 0; a < 2; ++a) {
    geo.dG[a] = geo.dJ[a].transpose() * geo.J + geo.J.transpose() * geo.dJ[a];
    geo.dGinv[a] = -geo.Ginv * geo.dG[a] * geo.Ginv;
    geo.dg[a] = geo.detG * (geo.Ginv * geo.dG[a]).trace();
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      // d2J = 0 for bilinear maps, so d2G is constant
      Mat2 d2G = geo.dJ[a].transpose() * geo.dJ[b] +
                 geo.dJ[b].transpose() * geo.dJ[a];
      geo.d2g[a][b] = geo.dg[b] * (geo.Ginv * geo.dG[a]).trace() +
                      geo.detG * ((geo.dGinv[b] * geo.dG[a]).trace() +
                                  (geo.Ginv * d2G).trace());
    }
  return geo;
}

/// Facet geometry at the quadrature points of a 1-D rule, evaluated from both
/// sides. Quadrature parameters follow the canonical (+) traversal; the (-)
/// side sees parameter 1-s. Edge restrictions of bilinear maps are affine,
/// so both sides share arclength weights while keeping their own tangent
/// planes (and hence their own in-plane normals).
struct FacetFrame {
  int nq = 0;
  std::vector<double> w_arc;            // arclength quadrature weights
  std::vector<Vec3> x;                  // physical points ((+) side chart)
  std::array<std::vector<Vec2>, 2> ref; // reference points per side
  std::array<std::vector<CellGeom>, 2> geom;
  std::array<std::vector<Vec3>, 2> normal; // in-plane outward unit normals
};

inline FacetFrame facet_frame(const Mesh& mesh, index_t facet_id,
                              const QuadratureRule1D& rule) {
  const Facet& f = mesh.facets[facet_id];
  FacetFrame frame;
  frame.nq = static_cast<int>(rule.points.size());
  frame.w_arc.resize(frame.nq);
  frame.x.resize(frame.nq);

  std::array<BilinearCell, 2> cells = {
      BilinearCell::from_corners(mesh.cell_coords[f.cell[0]]),
      BilinearCell::from_corners(mesh.cell_coords[f.cell[1]])};

  for (int side = 0; side < 2; ++side) {
    frame.ref[side].resize(frame.nq);
    frame.geom[side].resize(frame.nq);
    frame.normal[side].resize(frame.nq);
  }

  for (int q = 0; q < frame.nq; ++q) {
    double s = rule.points[q];
    for (int side = 0; side < 2; ++side) {
      double s_loc = (side == 0) ? s : 1.0 - s;
      Vec2 xi = edge_point(f.edge[side], s_loc);
      frame.ref[side][q] = xi;
      frame.geom[side][q] = cell_geom(cells[side], xi);
      // tangent along this side's own traversal
      Vec2 t_ref = edge_ref_tangent(f.edge[side]);
      Vec3 T = frame.geom[side][q].J * t_ref;
      Vec3 n = T.cross(frame.geom[side][q].N);
      frame.normal[side][q] = n / n.norm();
      if (side == 0) {
        frame.x[q] = cells[0].map(xi);
        frame.w_arc[q] = rule.weights[q] * T.norm();
      }
    }
  }
  return frame;
}

} // namespace vtm
