#pragma once

/// Upwind transport of Raviart-Thomas vector fields and of discontinuous
/// scalars, with trapezoidal time stepping.
///
/// The vector form G[gamma, v, F], for gamma, F in an RT space and velocity
/// v in an RT space over the same mesh, is
///
///   G = int_Gamma (v+ . n+) [[gamma]]+ . F' dS
///     - int_Omega F . [div(gamma (x) v)] dx
///     + int_Gamma (v+ . n+) (F' . n') (g'' . [n+ + n-]) dS,
///
/// where ' marks the upwind trace (ties at v+ . n+ = 0 go to the + side),
/// '' the downwind trace, and n' the upwind side's in-plane facet normal.
/// The last term projects the upwind flux into the tangent plane seen by the
/// downwind test function; it vanishes when both cells are coplanar. The
/// semi-discrete system is M dF/dt = -G F.
///
/// The scalar form for broken spaces is the classic upwind DG bilinear form
///   G_s = int_Gamma (v+ . n+) h' [[q]]+ dS - int_Omega h (v . grad q) dx.

#include <optional>
#include <vector>

#include "vtm/assembly.hpp"
#include "vtm/core.hpp"
#include "vtm/solvers.hpp"
#include "vtm/space.hpp"

namespace vtm {

struct TransportQuadrature {
  int volume_degree = 6;
  int facet_points = 4;
};

/// Matrix of the vector upwind form: rows test functions of V, columns
/// trial functions of V, velocity given as a field in any RT space on the
/// same mesh.
inline SparseMatrix assemble_upwind_form(const FunctionSpace& V,
                                         const Field& v,
                                         const TransportQuadrature& tq = {}) {
  const Mesh& mesh = *V.mesh;
  const FunctionSpace& W = *v.space;
  require(V.elem->map == PiolaMap::contravariant,
          "upwind form: RT space required");
  require(W.mesh == &mesh, "upwind form: velocity on a different mesh");
  Triplets trip(V.n_dofs, V.n_dofs);

  // volume term: -int F . [(grad gamma) v + gamma (div v)]
  QuadratureRule2D vol = tensor_gauss(tq.volume_degree);
  int nl = V.n_local();
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, vol);
    PhysVector Tg = phys_vector(*V.elem, vol.points, cq.geom, true);
    PhysVector Tv_other;
    if (W.elem != V.elem)
      Tv_other = phys_vector(*W.elem, vol.points, cq.geom);
    const PhysVector& Tv = (W.elem == V.elem) ? Tg : Tv_other;
    VecFieldCell vf = eval_vector_field(Tv, local_coeffs(v, c));
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nl, nl);
    for (int q = 0; q < cq.nq; ++q) {
      Vec2 u = pullback_tangent(cq.geom[q], vf.val[q]);
      double dv = vf.div[q];
      for (int i = 0; i < nl; ++i) {
        Vec3 conv = Tg.d(q, i, 0) * u[0] + Tg.d(q, i, 1) * u[1];
        for (int j = 0; j < nl; ++j)
          local(i, j) -= cq.w[q] * (Tg.v(q, j).dot(conv) +
                                    Tg.v(q, i).dot(Tg.v(q, j)) * dv);
      }
    }
    detail::scatter(trip, V, V, c, local);
  }

  // facet terms
  QuadratureRule1D line = gauss_legendre(tq.facet_points);
  FacetTabCache tabs = build_facet_tabs(*V.elem, line);
  FacetTabCache vtabs_other;
  if (W.elem != V.elem) vtabs_other = build_facet_tabs(*W.elem, line);
  const FacetTabCache& vtabs = (W.elem == V.elem) ? tabs : vtabs_other;

  for (index_t f = 0; f < mesh.n_facets(); ++f) {
    const Facet& fc = mesh.facets[f];
    FacetFrame fr = facet_frame(mesh, f, line);
    Eigen::VectorXd lv = local_coeffs(v, fc.cell[0]);
    const Tabulation& vt = vtabs.at(0, fc.edge[0]);
    for (int q = 0; q < fr.nq; ++q) {
      Vec3 vq = Vec3::Zero();
      for (int i = 0; i < vt.n_dofs; ++i)
        vq += lv[i] * contravariant_value(vt, fr.geom[0][q], i, q);
      double flux = vq.dot(fr.normal[0][q]);
      int up = flux >= 0.0 ? 0 : 1;
      int down = 1 - up;
      index_t cu = fc.cell[up], cd = fc.cell[down];
      const Tabulation& tu = tabs.at(up, fc.edge[up]);
      const Tabulation& td = tabs.at(down, fc.edge[down]);
      const CellGeom& gu = fr.geom[up][q];
      const CellGeom& gd = fr.geom[down][q];
      Vec3 nsum = fr.normal[0][q] + fr.normal[1][q];
      double w = fr.w_arc[q] * flux;

      for (int j = 0; j < nl; ++j) {
        Vec3 Fj = contravariant_value(tu, gu, j, q);
        double su = V.sign(cu, j);
        // jump term, rows from both sides
        for (int i = 0; i < nl; ++i) {
          double jump_u = (up == 0 ? 1.0 : -1.0) * V.sign(cu, i);
          Vec3 gi_u = contravariant_value(tu, gu, i, q);
          trip.add(V.dof(cu, i), V.dof(cu, j),
                   w * jump_u * su * gi_u.dot(Fj));
          double jump_d = (down == 0 ? 1.0 : -1.0) * V.sign(cd, i);
          Vec3 gi_d = contravariant_value(td, gd, i, q);
          trip.add(V.dof(cd, i), V.dof(cu, j),
                   w * jump_d * su * gi_d.dot(Fj));
        }
        // tangent-plane correction, downwind rows against upwind columns
        double Fn = Fj.dot(fr.normal[up][q]);
        for (int i = 0; i < nl; ++i) {
          Vec3 gi_d = contravariant_value(td, gd, i, q);
          trip.add(V.dof(cd, i), V.dof(cu, j),
                   w * V.sign(cd, i) * su * Fn * gi_d.dot(nsum));
        }
      }
    }
  }
  return SparseMatrix::from_triplets(trip);
}

/// Residual vector of the vector form for a concrete F.
inline Eigen::VectorXd apply_benchmark_form(const FunctionSpace& V,
                                            const Field& v, const Field& F,
                                            const TransportQuadrature& tq = {}) {
  require(F.space == &V, "benchmark form: F must lie in the test space");
  return assemble_upwind_form(V, v, tq) * F.coeffs;
}

/// Matrix of the scalar upwind form on a discontinuous scalar space.
inline SparseMatrix assemble_scalar_upwind_form(const FunctionSpace& V,
                                                const Field& v,
                                                const TransportQuadrature& tq = {}) {
  const Mesh& mesh = *V.mesh;
  const FunctionSpace& W = *v.space;
  require(V.elem->n_comp == 1, "scalar upwind form: scalar space required");
  require(V.continuity == Continuity::broken || V.family == Family::DG0,
          "scalar upwind form: space must be discontinuous");
  require(W.mesh == &mesh, "scalar upwind form: velocity on a different mesh");
  Triplets trip(V.n_dofs, V.n_dofs);

  QuadratureRule2D vol = tensor_gauss(tq.volume_degree);
  int nl = V.n_local();
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, vol);
    PhysScalar Tq = phys_scalar(*V.elem, vol.points, cq.geom);
    PhysVector Tv = phys_vector(*W.elem, vol.points, cq.geom);
    VecFieldCell vf = eval_vector_field(Tv, local_coeffs(v, c));
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nl, nl);
    for (int q = 0; q < cq.nq; ++q)
      for (int i = 0; i < nl; ++i) {
        double adv = Tq.tg(q, i).dot(vf.val[q]);
        for (int j = 0; j < nl; ++j)
          local(i, j) -= cq.w[q] * Tq.v(q, j) * adv;
      }
    detail::scatter(trip, V, V, c, local);
  }

  QuadratureRule1D line = gauss_legendre(tq.facet_points);
  FacetTabCache tabs = build_facet_tabs(*V.elem, line);
  FacetTabCache vtabs = build_facet_tabs(*W.elem, line);

  for (index_t f = 0; f < mesh.n_facets(); ++f) {
    const Facet& fc = mesh.facets[f];
    FacetFrame fr = facet_frame(mesh, f, line);
    Eigen::VectorXd lv = local_coeffs(v, fc.cell[0]);
    const Tabulation& vt = vtabs.at(0, fc.edge[0]);
    for (int q = 0; q < fr.nq; ++q) {
      Vec3 vq = Vec3::Zero();
      for (int i = 0; i < vt.n_dofs; ++i)
        vq += lv[i] * contravariant_value(vt, fr.geom[0][q], i, q);
      double flux = vq.dot(fr.normal[0][q]);
      int up = flux >= 0.0 ? 0 : 1;
      index_t cu = fc.cell[up];
      const Tabulation& tu = tabs.at(up, fc.edge[up]);
      double w = fr.w_arc[q] * flux;
      for (int j = 0; j < nl; ++j) {
        double hj = tu.v(j, q);
        for (int side = 0; side < 2; ++side) {
          index_t cs = fc.cell[side];
          const Tabulation& ts = tabs.at(side, fc.edge[side]);
          double jump = side == 0 ? 1.0 : -1.0;
          for (int i = 0; i < nl; ++i)
            trip.add(V.dof(cs, i), V.dof(cu, j), w * jump * ts.v(i, q) * hj);
        }
      }
    }
  }
  return SparseMatrix::from_triplets(trip);
}

struct StepperOptions {
  SolverMethod method = SolverMethod::direct;
  double rtol = 1e-10;
  int max_iter = 400;
  TransportQuadrature quadrature;
};

/// Trapezoidal integrator around an upwind form: given velocity v, steps
///   (M + dt/2 G) F_new = (M - dt/2 G) F_old.
/// With the direct method the implicit operator is factored once per
/// velocity change; with GMRES the factored mass matrix preconditions every
/// solve and the previous state seeds the iteration.
class UpwindTransport {
 public:
  UpwindTransport(const FunctionSpace& V, double dt,
                  const StepperOptions& opts = {})
      : V_(&V), dt_(dt), opts_(opts),
        scalar_(V.elem->n_comp == 1),
        M_(assemble_mass(V, opts.quadrature.volume_degree)) {
    require(dt > 0, "transport: dt must be positive");
    if (opts_.method != SolverMethod::direct)
      mass_fac_ = std::make_unique<DirectFactorization>(M_, true);
  }

  void set_velocity(const Field& v) {
    G_ = scalar_ ? assemble_scalar_upwind_form(*V_, v, opts_.quadrature)
                 : assemble_upwind_form(*V_, v, opts_.quadrature);
    implicit_ = add_scaled(1.0, M_, 0.5 * dt_, G_);
    explicit_ = add_scaled(1.0, M_, -0.5 * dt_, G_);
    if (opts_.method == SolverMethod::direct)
      impl_fac_ = std::make_unique<DirectFactorization>(implicit_, false);
  }

  Eigen::VectorXd step(const Eigen::VectorXd& F) const {
    require(implicit_.nrows == F.size(), "transport step: no velocity set");
    Eigen::VectorXd rhs = explicit_ * F;
    if (opts_.method == SolverMethod::direct) return impl_fac_->solve(rhs);
    SolverOptions sopts;
    sopts.method = SolverMethod::gmres;
    sopts.rtol = opts_.rtol;
    sopts.max_iter = opts_.max_iter;
    SolveReport rep;
    Preconditioner prec = [this](const Eigen::VectorXd& r) {
      return mass_fac_->solve(r);
    };
    Eigen::VectorXd out =
        solve_gmres(implicit_, rhs, sopts, &rep, prec, &F);
    require(rep.converged, "transport step: linear solve failed");
    return out;
  }

  Field step(const Field& F) const {
    require(F.space == V_, "transport step: wrong space");
    return Field(*V_, step(F.coeffs));
  }

  const SparseMatrix& mass() const { return M_; }
  const SparseMatrix& form() const { return G_; }

 private:
  const FunctionSpace* V_;
  double dt_;
  StepperOptions opts_;
  bool scalar_;
  SparseMatrix M_, G_, implicit_, explicit_;
  std::unique_ptr<DirectFactorization> mass_fac_, impl_fac_;
};

} // namespace vtm
