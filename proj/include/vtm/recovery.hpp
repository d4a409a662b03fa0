#pragma once

/// Recovered transport: reconstruct a lowest-order field in a richer space,
/// transport it there with the upwind scheme, and project back.
///
/// The reconstruction J : V_L -> V_H is built from four pieces,
///
///   J = I_H + P_H R - I_H P_L P_H R,      R = A Phat_R,
///
/// where I_H is the exact injection (V_L is a polynomial subspace of V_H),
/// Phat_R is the cell-wise Galerkin projection into the broken recovery
/// space, A averages shared DoFs of the recovery space, and P_L / P_H are
/// global Galerkin projections.  The final two terms remove the low-order
/// part of the recovery so that P_L J = id on V_L and the high-order
/// correction carries no net V_L content.
///
/// Vector transport uses V_L = RTcf1, V_H = RTcf2 and recovers through the
/// H(curl) space V_R = RTce2, whose DoFs (tangential edge moments) are
/// exactly the ones that must be averaged to gain smoothness.  The scalar
/// variant (used for layer depth) runs DG0 -> broken CG1 -> CG1.

#include <memory>

#include "vtm/assembly.hpp"
#include "vtm/solvers.hpp"
#include "vtm/transport_upwind.hpp"

namespace vtm {

/// Reference-element injection: row k holds the V_H DoF functionals applied
/// to the k-th V_L reference basis function, i.e. E(i,j) = dof_i^H(phi_j^L).
inline Eigen::MatrixXd reference_injection(const ReferenceElement& high,
                                           const ReferenceElement& low) {
  require(high.n_comp == low.n_comp, "injection: component mismatch");
  Eigen::MatrixXd E(high.n_dofs(), low.n_dofs());
  for (int j = 0; j < low.n_dofs(); ++j) {
    for (int i = 0; i < high.n_dofs(); ++i) {
      E(i, j) = high.apply_dof(i, [&](const Vec2& p) {
        std::vector<Vec2> pt{p};
        Tabulation tab = low.tabulate(pt);
        Eigen::VectorXd val(low.n_comp);
        for (int c = 0; c < low.n_comp; ++c) val[c] = tab.v(j, 0, c);
        return val;
      });
    }
  }
  return E;
}

/// Exact injection V_L -> V_H assembled globally.  Both spaces share the
/// Piola map, so applying the V_H DoF functionals cell-wise to a conforming
/// V_L field gives identical values from either side of a facet; shared
/// rows are averaged to keep the assembly symmetric in the cell ordering.
inline SparseMatrix assemble_injection(const FunctionSpace& VH,
                                       const FunctionSpace& VL) {
  require(VH.mesh == VL.mesh, "injection: mesh mismatch");
  const Mesh& mesh = *VH.mesh;
  Eigen::MatrixXd E = reference_injection(*VH.elem, *VL.elem);
  std::vector<double> visits(VH.n_dofs, 0.0);
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < VH.n_local(); ++i) visits[VH.dof(c, i)] += 1.0;
  Triplets t(VH.n_dofs, VL.n_dofs);
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i < VH.n_local(); ++i) {
      index_t gi = VH.dof(c, i);
      double wi = VH.sign(c, i) / visits[gi];
      for (int j = 0; j < VL.n_local(); ++j)
        t.add(gi, VL.dof(c, j), wi * E(i, j) * VL.sign(c, j));
    }
  }
  return SparseMatrix::from_triplets(t);
}

/// Averaging operator A : broken V_R -> conforming V_R.  Each conforming DoF
/// becomes the arithmetic mean of the broken per-cell values, all expressed
/// in the conforming DoF's own orientation; DoFs seen by one cell only are
/// passed through unchanged.
inline SparseMatrix assemble_averaging(const FunctionSpace& VR,
                                       const FunctionSpace& VRb) {
  require(VR.mesh == VRb.mesh && VR.elem == VRb.elem,
          "averaging: spaces must share mesh and element");
  const Mesh& mesh = *VR.mesh;
  std::vector<double> mult(VR.n_dofs, 0.0);
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < VR.n_local(); ++i) mult[VR.dof(c, i)] += 1.0;
  Triplets t(VR.n_dofs, VRb.n_dofs);
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < VR.n_local(); ++i) {
      index_t gi = VR.dof(c, i);
      t.add(gi, VRb.dof(c, i), VR.sign(c, i) / mult[gi]);
    }
  return SparseMatrix::from_triplets(t);
}

/// Cell-wise Galerkin projection V_L -> broken V_R.  Block diagonal, so the
/// local mass systems are solved densely and scattered.
inline SparseMatrix assemble_broken_projection(const FunctionSpace& VRb,
                                               const FunctionSpace& VL,
                                               int quad_degree) {
  require(VRb.mesh == VL.mesh, "broken projection: mesh mismatch");
  const Mesh& mesh = *VRb.mesh;
  QuadratureRule2D rule = tensor_gauss(quad_degree);
  int nr = VRb.n_local(), nl = VL.n_local();
  Triplets t(VRb.n_dofs, VL.n_dofs);
  for (index_t c = 0; c < mesh.n_cells(); ++c) {
    CellQuad cq = cell_quad(mesh, c, rule);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nr, nr);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nr, nl);
    if (VRb.elem->n_comp == 2) {
      PhysVector Tr = phys_vector(*VRb.elem, rule.points, cq.geom);
      PhysVector Tl = phys_vector(*VL.elem, rule.points, cq.geom);
      for (int q = 0; q < cq.nq; ++q) {
        for (int i = 0; i < nr; ++i) {
          Vec3 gi = Tr.v(q, i);
          for (int j = 0; j < nr; ++j) M(i, j) += cq.w[q] * gi.dot(Tr.v(q, j));
          for (int j = 0; j < nl; ++j) B(i, j) += cq.w[q] * gi.dot(Tl.v(q, j));
        }
      }
    } else {
      PhysScalar Tr = phys_scalar(*VRb.elem, rule.points, cq.geom);
      PhysScalar Tl = phys_scalar(*VL.elem, rule.points, cq.geom);
      for (int q = 0; q < cq.nq; ++q) {
        for (int i = 0; i < nr; ++i) {
          double gi = Tr.v(q, i);
          for (int j = 0; j < nr; ++j) M(i, j) += cq.w[q] * gi * Tr.v(q, j);
          for (int j = 0; j < nl; ++j) B(i, j) += cq.w[q] * gi * Tl.v(q, j);
        }
      }
    }
    Eigen::MatrixXd X = M.ldlt().solve(B);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nl; ++j)
        t.add(VRb.dof(c, i), VL.dof(c, j), X(i, j) * VL.sign(c, j));
  }
  return SparseMatrix::from_triplets(t);
}

struct RecoveryOperators {
  const FunctionSpace* VL = nullptr;
  const FunctionSpace* VH = nullptr;
  const FunctionSpace* VR = nullptr;
  const FunctionSpace* VRb = nullptr;

  SparseMatrix IH;   // exact injection V_L -> V_H
  SparseMatrix R;    // A * Phat_R : V_L -> V_R
  SparseMatrix A;    // averaging, broken V_R -> V_R
  SparseMatrix B_HR; // mixed mass, V_H test x V_R trial
  SparseMatrix B_LH; // mixed mass, V_L test x V_H trial
  std::shared_ptr<DirectFactorization> MH_fac, ML_fac;

  /// P_H of a recovery-space field.
  Eigen::VectorXd apply_PH(const Eigen::VectorXd& uR) const {
    return MH_fac->solve(B_HR * uR);
  }

  /// P_L of a high-order field.
  Eigen::VectorXd apply_PL(const Eigen::VectorXd& uH) const {
    return ML_fac->solve(B_LH * uH);
  }

  /// J u = I_H u + P_H R u - I_H P_L P_H R u.
  Eigen::VectorXd apply_J(const Eigen::VectorXd& uL) const {
    Eigen::VectorXd z = apply_PH(R * uL);
    return IH * uL + z - IH * apply_PL(z);
  }
};

inline RecoveryOperators build_recovery(const FunctionSpace& VL,
                                        const FunctionSpace& VH,
                                        const FunctionSpace& VR,
                                        const FunctionSpace& VRb,
                                        int quad_degree = kDefaultQuadDegree) {
  require(VL.mesh == VH.mesh && VL.mesh == VR.mesh && VL.mesh == VRb.mesh,
          "recovery: mesh mismatch");
  require(VR.elem == VRb.elem, "recovery: V_R spaces must share the element");
  RecoveryOperators ops;
  ops.VL = &VL;
  ops.VH = &VH;
  ops.VR = &VR;
  ops.VRb = &VRb;
  ops.IH = assemble_injection(VH, VL);
  ops.A = assemble_averaging(VR, VRb);
  ops.R = multiply(ops.A, assemble_broken_projection(VRb, VL, quad_degree));
  ops.B_HR = assemble_mixed_mass(VH, VR, quad_degree);
  ops.B_LH = assemble_mixed_mass(VL, VH, quad_degree);
  ops.MH_fac = std::make_shared<DirectFactorization>(
      assemble_mass(VH, quad_degree), true);
  ops.ML_fac = std::make_shared<DirectFactorization>(
      assemble_mass(VL, quad_degree), true);
  return ops;
}

/// Spaces for the two standard recovery stacks, owned together so the
/// operator set can point into them.
struct RecoverySpaces {
  FunctionSpace VL, VH, VR, VRb;
};

inline RecoverySpaces vector_recovery_spaces(const Mesh& mesh) {
  return {FunctionSpace(mesh, Family::RTcf1, Continuity::conforming),
          FunctionSpace(mesh, Family::RTcf2, Continuity::conforming),
          FunctionSpace(mesh, Family::RTce2, Continuity::conforming),
          FunctionSpace(mesh, Family::RTce2, Continuity::broken)};
}

inline RecoverySpaces scalar_recovery_spaces(const Mesh& mesh) {
  return {FunctionSpace(mesh, Family::DG0, Continuity::broken),
          FunctionSpace(mesh, Family::CG1, Continuity::broken),
          FunctionSpace(mesh, Family::CG1, Continuity::conforming),
          FunctionSpace(mesh, Family::CG1, Continuity::broken)};
}

/// One transport step u^{n+1} = P_L T J u^n with T the trapezoidal upwind
/// step in V_H.  The transporting velocity lives in V_H; a field given in
/// V_L is injected first.
class RecoveredTransport {
 public:
  RecoveredTransport(const RecoveryOperators& ops, double dt,
                     StepperOptions opts = {})
      : ops_(&ops), inner_(*ops.VH, dt, opts), vH_(*ops.VH) {}

  void set_velocity(const Field& v) {
    if (ops_->VH->elem->n_comp == 1) {
      // Scalar stack: the advecting velocity lives in its own vector space
      // and is passed straight to the broken-space stepper.
      inner_.set_velocity(v);
      return;
    }
    if (v.space == ops_->VH) {
      vH_.coeffs = v.coeffs;
    } else {
      require(v.space == ops_->VL, "recovered step: velocity must be V_L or V_H");
      vH_.coeffs = ops_->IH * v.coeffs;
    }
    inner_.set_velocity(vH_);
  }

  Field step(const Field& u) const {
    require(u.space == ops_->VL, "recovered step: field must be in V_L");
    Eigen::VectorXd high = inner_.step(ops_->apply_J(u.coeffs));
    Field out(*ops_->VL);
    out.coeffs = ops_->apply_PL(high);
    return out;
  }

  const Field& injected_velocity() const { return vH_; }

 private:
  const RecoveryOperators* ops_;
  UpwindTransport inner_;
  Field vH_;
};

} // namespace vtm
