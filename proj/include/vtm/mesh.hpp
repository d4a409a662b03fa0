#pragma once

/// Quadrilateral surface meshes embedded in R^3: doubly periodic cylinder,
/// equiangular gnomonic cubed sphere, and a doubly periodic flat plane used
/// by tests.
///
/// Conventions (relied on throughout the library):
///  * Cell corners are listed counter-clockwise with respect to the outward
///    manifold normal; corner k has reference coordinates (0,0),(1,0),(1,1),
///    (0,1) for k = 0..3.
///  * Local edge e runs from corner e to corner (e+1)%4, i.e. edges are
///    traversed in the cell's CCW order.
///  * Every edge of the closed manifold is shared by exactly two cells. The
///    facet's (+) side is the lower cell id; the canonical facet direction is
///    the (+) side's traversal. Consistent orientation guarantees the (-)
///    side traverses the same edge backwards.
///  * Periodic seams are deduplicated in the connectivity only. Corner
///    coordinates are stored per (cell, corner) so that cell geometry never
///    wraps around a period.

#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "vtm/core.hpp"

namespace vtm {

struct Facet {
  index_t cell[2];  // cell[0] is the (+) side
  int edge[2];      // local edge within each cell
  index_t v[2];     // canonical direction v[0] -> v[1] (the (+) traversal)
};

struct Mesh {
  std::vector<Vec3> vertices;                   // deduplicated
  std::vector<std::array<index_t, 4>> cells;    // CCW vertex ids
  std::vector<std::array<Vec3, 4>> cell_coords; // unwrapped corner coordinates
  std::vector<Facet> facets;
  std::vector<std::array<index_t, 4>> cell_facets; // facet id per local edge
  std::vector<std::array<int, 4>> cell_facet_side; // 0 = (+) side, 1 = (-)

  std::string kind; // "cylinder" | "cubed_sphere" | "plane"
  double geom_a = 0.0, geom_b = 0.0; // cylinder: rho, L; sphere: r, -

  index_t n_cells() const { return static_cast<index_t>(cells.size()); }
  index_t n_vertices() const { return static_cast<index_t>(vertices.size()); }
  index_t n_facets() const { return static_cast<index_t>(facets.size()); }
  index_t euler_characteristic() const {
    return n_vertices() - n_facets() + n_cells();
  }
};

/// Reference coordinates of a point on local edge e at traversal parameter s.
inline Vec2 edge_point(int e, double s) {
  switch (e) {
    case 0: return {s, 0.0};
    case 1: return {1.0, s};
    case 2: return {1.0 - s, 1.0};
    default: return {0.0, 1.0 - s};
  }
}

/// Unit outward normal of local edge e on the reference square.
inline Vec2 edge_ref_normal(int e) {
  switch (e) {
    case 0: return {0.0, -1.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, 1.0};
    default: return {-1.0, 0.0};
  }
}

/// CCW unit tangent of local edge e on the reference square.
inline Vec2 edge_ref_tangent(int e) {
  switch (e) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

namespace detail {

/// Build facet tables from cell connectivity. Each undirected vertex pair
/// must occur exactly twice, with opposite traversal directions.
inline void build_facets(Mesh& mesh) {
  struct Seen {
    index_t cell;
    int edge;
    index_t a, b; // directed traversal a -> b
  };
  std::map<std::pair<index_t, index_t>, Seen> open;
  mesh.facets.clear();
  mesh.cell_facets.assign(mesh.cells.size(), {-1, -1, -1, -1});
  mesh.cell_facet_side.assign(mesh.cells.size(), {-1, -1, -1, -1});

  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    for (int e = 0; e < 4; ++e) {
      index_t a = mesh.cells[c][e];
      index_t b = mesh.cells[c][(e + 1) % 4];
      require(a != b, "mesh: degenerate edge");
      std::pair<index_t, index_t> key = std::minmax(a, b);
      auto it = open.find(key);
      if (it == open.end()) {
        open[key] = {c, e, a, b};
      } else {
        const Seen& first = it->second;
        require(first.a == b && first.b == a,
                "mesh: inconsistent orientation on shared edge");
        Facet f;
        f.cell[0] = first.cell;
        f.edge[0] = first.edge;
        f.cell[1] = c;
        f.edge[1] = e;
        f.v[0] = first.a;
        f.v[1] = first.b;
        index_t id = static_cast<index_t>(mesh.facets.size());
        mesh.facets.push_back(f);
        mesh.cell_facets[first.cell][first.edge] = id;
        mesh.cell_facet_side[first.cell][first.edge] = 0;
        mesh.cell_facets[c][e] = id;
        mesh.cell_facet_side[c][e] = 1;
        open.erase(it);
      }
    }
  }
  require(open.empty(), "mesh: boundary edge on a closed manifold");
}

} // namespace detail

/// Doubly periodic cylinder of radius rho and axial period L, n_phi x n_z
/// cells. Requires n_phi, n_z >= 3 so that vertex pairs identify edges
/// uniquely.
inline Mesh build_cylinder_mesh(int n_phi, int n_z, double rho, double L) {
  require(n_phi >= 3 && n_z >= 3, "cylinder mesh: need n_phi, n_z >= 3");
  require(rho > 0 && L > 0, "cylinder mesh: need rho, L > 0");
  Mesh mesh;
  mesh.kind = "cylinder";
  mesh.geom_a = rho;
  mesh.geom_b = L;

  auto coord = [&](index_t i, index_t j) {
    double phi = 2.0 * M_PI * static_cast<double>(i) / n_phi;
    double z = L * static_cast<double>(j) / n_z;
    return Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
  };
  for (index_t j = 0; j < n_z; ++j)
    for (index_t i = 0; i < n_phi; ++i) mesh.vertices.push_back(coord(i, j));

  auto vid = [&](index_t i, index_t j) {
    return (i % n_phi) + n_phi * (j % n_z);
  };
  for (index_t j = 0; j < n_z; ++j)
    for (index_t i = 0; i < n_phi; ++i) {
      mesh.cells.push_back(
          {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      // unwrapped coordinates: i+1, j+1 evaluated without the modulus so the
      // z seam keeps z = L rather than z = 0 (phi wraps smoothly in R^3)
      mesh.cell_coords.push_back(
          {coord(i, j), coord(i + 1, j), coord(i + 1, j + 1),
           coord(i, j + 1)});
    }
  detail::build_facets(mesh);
  return mesh;
}

/// Doubly periodic flat plane [0,Lx) x [0,Ly) embedded at z = 0.
inline Mesh build_plane_mesh(int nx, int ny, double Lx, double Ly) {
  require(nx >= 3 && ny >= 3, "plane mesh: need nx, ny >= 3");
  require(Lx > 0 && Ly > 0, "plane mesh: need Lx, Ly > 0");
  Mesh mesh;
  mesh.kind = "plane";
  mesh.geom_a = Lx;
  mesh.geom_b = Ly;

  auto coord = [&](index_t i, index_t j) {
    return Vec3(Lx * static_cast<double>(i) / nx,
                Ly * static_cast<double>(j) / ny, 0.0);
  };
  for (index_t j = 0; j < ny; ++j)
    for (index_t i = 0; i < nx; ++i) mesh.vertices.push_back(coord(i, j));
  auto vid = [&](index_t i, index_t j) { return (i % nx) + nx * (j % ny); };
  for (index_t j = 0; j < ny; ++j)
    for (index_t i = 0; i < nx; ++i) {
      mesh.cells.push_back(
          {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      mesh.cell_coords.push_back(
          {coord(i, j), coord(i + 1, j), coord(i + 1, j + 1),
           coord(i, j + 1)});
    }
  detail::build_facets(mesh);
  return mesh;
}

/// Equiangular gnomonic cubed sphere of radius r with n x n cells per panel.
/// Shared panel-edge vertices are constructed bitwise identically (the tan
/// grid is snapped to +-1 at the panel boundary), so deduplication is exact.
inline Mesh build_cubed_sphere_mesh(int n, double r) {
  require(n >= 2, "cubed sphere mesh: need n >= 2 cells per panel edge");
  require(r > 0, "cubed sphere mesh: need r > 0");
  Mesh mesh;
  mesh.kind = "cubed_sphere";
  mesh.geom_a = r;

  std::vector<double> tangrid(n + 1);
  for (int i = 0; i <= n; ++i) {
    double alpha = -M_PI / 4.0 + (M_PI / 2.0) * static_cast<double>(i) / n;
    tangrid[i] = std::tan(alpha);
  }
  tangrid[0] = -1.0;
  tangrid[n] = 1.0;

  // panel frames with e_a x e_b = e_r so CCW cell order faces outward
  const Vec3 X(1, 0, 0), Y(0, 1, 0), Z(0, 0, 1);
  struct Frame { Vec3 er, ea, eb; };
  const std::array<Frame, 6> panels = {{{X, Y, Z},
                                        {-X, Z, Y},
                                        {Y, Z, X},
                                        {-Y, X, Z},
                                        {Z, X, Y},
                                        {-Z, Y, X}}};

  auto point = [&](const Frame& f, int i, int j) {
    Vec3 p = f.er + tangrid[i] * f.ea + tangrid[j] * f.eb;
    return Vec3(r * p / p.norm());
  };

  // exact-bit vertex key; construction makes shared coordinates identical
  using Key = std::array<std::int64_t, 3>;
  std::map<Key, index_t> seen;
  auto vertex_id = [&](const Vec3& p) {
    Key k;
    static_assert(sizeof(double) == sizeof(std::int64_t));
    for (int d = 0; d < 3; ++d) {
      double v = p[d] == 0.0 ? 0.0 : p[d]; // collapse -0.0
      std::memcpy(&k[d], &v, sizeof(double));
    }
    auto [it, inserted] =
        seen.try_emplace(k, static_cast<index_t>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(p);
    return it->second;
  };

  for (const Frame& f : panels)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::array<Vec3, 4> q = {point(f, i, j), point(f, i + 1, j),
                                 point(f, i + 1, j + 1), point(f, i, j + 1)};
        std::array<index_t, 4> ids = {vertex_id(q[0]), vertex_id(q[1]),
                                      vertex_id(q[2]), vertex_id(q[3])};
        mesh.cells.push_back(ids);
        mesh.cell_coords.push_back(q);
      }
  detail::build_facets(mesh);
  return mesh;
}

} // namespace vtm
