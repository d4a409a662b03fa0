#pragma once

/// Global function spaces over a mesh: entity-based DoF numbering plus the
/// per-(cell, local dof) orientation signs that glue shared edge DoFs.
///
/// Numbering is vertex block, then edge block (facet-id major, moment minor),
/// then cell block; all deterministic. Edge moments are single-valued against
/// the facet's canonical direction and normal, both defined by the (+) side:
/// the (+) cell keeps sign +1 on its edge DoFs, the (-) cell sees the edge
/// reversed and its outward flux negated, giving sign (-1)^(q+1) for the
/// moment of Legendre degree q. This holds for normal (H(div)) and
/// tangential (H(curl)) moments alike. Broken spaces number every DoF
/// cell-locally with sign +1.

#include <vector>

#include "vtm/core.hpp"
#include "vtm/element.hpp"
#include "vtm/mesh.hpp"

namespace vtm {

enum class Continuity { conforming, broken };

class FunctionSpace {
 public:
  const Mesh* mesh = nullptr;
  Family family{};
  Continuity continuity = Continuity::conforming;
  const ReferenceElement* elem = nullptr;

  index_t n_dofs = 0;
  std::vector<index_t> gdof;  // [cell * n_local + i]
  std::vector<double> gsign;  // same layout, +-1

  FunctionSpace() = default;
  FunctionSpace(const Mesh& m, Family f,
                Continuity cont = Continuity::conforming)
      : mesh(&m), family(f), continuity(cont), elem(&element(f)) {
    int nl = elem->n_dofs();
    gdof.assign(mesh->cells.size() * nl, -1);
    gsign.assign(mesh->cells.size() * nl, 1.0);

    if (continuity == Continuity::broken) {
      for (index_t c = 0; c < mesh->n_cells(); ++c)
        for (int i = 0; i < nl; ++i) gdof[c * nl + i] = c * nl + i;
      n_dofs = mesh->n_cells() * nl;
      return;
    }

    int per_vertex = 0, per_edge = 0, per_cell = 0;
    for (const DofInfo& d : elem->dofs) {
      if (d.entity == DofInfo::Entity::vertex) per_vertex = 1;
      if (d.entity == DofInfo::Entity::edge)
        per_edge = std::max(per_edge, d.moment + 1);
      if (d.entity == DofInfo::Entity::interior) ++per_cell;
    }
    index_t vertex_base = 0;
    index_t edge_base = per_vertex * mesh->n_vertices();
    index_t cell_base = edge_base + per_edge * mesh->n_facets();
    n_dofs = cell_base + per_cell * mesh->n_cells();

    for (index_t c = 0; c < mesh->n_cells(); ++c) {
      int interior_seen = 0;
      for (int i = 0; i < nl; ++i) {
        const DofInfo& d = elem->dofs[i];
        index_t g = -1;
        double sign = 1.0;
        switch (d.entity) {
          case DofInfo::Entity::vertex:
            g = vertex_base + mesh->cells[c][d.index];
            break;
          case DofInfo::Entity::edge: {
            index_t facet = mesh->cell_facets[c][d.index];
            int side = mesh->cell_facet_side[c][d.index];
            g = edge_base + facet * per_edge + d.moment;
            if (elem->n_comp == 2 && side == 1)
              sign = (d.moment % 2 == 0) ? -1.0 : 1.0;
            break;
          }
          case DofInfo::Entity::interior:
            g = cell_base + c * per_cell + interior_seen++;
            break;
        }
        gdof[c * nl + i] = g;
        gsign[c * nl + i] = sign;
      }
    }
  }

  int n_local() const { return elem->n_dofs(); }

  index_t dof(index_t cell, int i) const { return gdof[cell * n_local() + i]; }
  double sign(index_t cell, int i) const { return gsign[cell * n_local() + i]; }
};

struct Field {
  const FunctionSpace* space = nullptr;
  Eigen::VectorXd coeffs;

  Field() = default;
  explicit Field(const FunctionSpace& V)
      : space(&V), coeffs(Eigen::VectorXd::Zero(V.n_dofs)) {}
  Field(const FunctionSpace& V, Eigen::VectorXd c)
      : space(&V), coeffs(std::move(c)) {
    require(coeffs.size() == V.n_dofs, "field: coefficient size mismatch");
  }
};

/// Local coefficients of a field on one cell (orientation signs applied).
inline Eigen::VectorXd local_coeffs(const Field& u, index_t cell) {
  const FunctionSpace& V = *u.space;
  int nl = V.n_local();
  Eigen::VectorXd lc(nl);
  for (int i = 0; i < nl; ++i)
    lc[i] = V.sign(cell, i) * u.coeffs[V.dof(cell, i)];
  return lc;
}

} // namespace vtm
