#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <vtm/recovery.hpp>

using namespace vtm;

namespace {

std::mt19937 rng(424242);

Eigen::VectorXd random_vector(index_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (index_t i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

} // namespace

TEST_CASE("vector recovery: P_L o J is the identity on V_L") {
  for (auto mesh : {build_cylinder_mesh(6, 5, 2.0, 7.0),
                    build_cubed_sphere_mesh(4, 10.0)}) {
    RecoverySpaces sp = vector_recovery_spaces(mesh);
    RecoveryOperators ops = build_recovery(sp.VL, sp.VH, sp.VR, sp.VRb);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd u = random_vector(sp.VL.n_dofs);
      Eigen::VectorXd r = ops.apply_PL(ops.apply_J(u));
      CHECK((r - u).cwiseAbs().maxCoeff() < 1e-10 * u.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("scalar recovery: P_L o J is the identity on V_L") {
  Mesh mesh = build_cubed_sphere_mesh(4, 10.0);
  RecoverySpaces sp = scalar_recovery_spaces(mesh);
  RecoveryOperators ops = build_recovery(sp.VL, sp.VH, sp.VR, sp.VRb);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd u = random_vector(sp.VL.n_dofs);
    Eigen::VectorXd r = ops.apply_PL(ops.apply_J(u));
    CHECK((r - u).cwiseAbs().maxCoeff() < 1e-10 * u.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("injection into the higher space is pointwise exact") {
  Mesh mesh = build_cubed_sphere_mesh(3, 5.0);
  RecoverySpaces sp = vector_recovery_spaces(mesh);
  SparseMatrix IH = assemble_injection(sp.VH, sp.VL);
  Field uL(sp.VL, random_vector(sp.VL.n_dofs));
  Field uH(sp.VH, IH * uL.coeffs);
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    for (Vec2 xi : {Vec2(0.21, 0.47), Vec2(0.8, 0.05), Vec2(0.5, 0.96)}) {
      Vec3 a = eval_vector_at(uL, c, xi);
      Vec3 b = eval_vector_at(uH, c, xi);
      REQUIRE((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }
}

TEST_CASE("averaging restores conforming recovery-space data") {
  Mesh mesh = build_cylinder_mesh(5, 4, 1.0, 3.0);
  RecoverySpaces sp = vector_recovery_spaces(mesh);
  SparseMatrix A = assemble_averaging(sp.VR, sp.VRb);
  Eigen::VectorXd w = random_vector(sp.VR.n_dofs);
  // scatter to broken coefficients exactly as local restriction does
  Eigen::VectorXd brok(sp.VRb.n_dofs);
  int nl = sp.VR.n_local();
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < nl; ++i)
      brok[sp.VRb.dof(c, i)] = sp.VR.sign(c, i) * w[sp.VR.dof(c, i)];
  Eigen::VectorXd back = A * brok;
  CHECK((back - w).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("scalar recovery and transport preserve the total integral") {
  Mesh mesh = build_cubed_sphere_mesh(4, 10.0);
  RecoverySpaces sp = scalar_recovery_spaces(mesh);
  RecoveryOperators ops = build_recovery(sp.VL, sp.VH, sp.VR, sp.VRb);

  Field h(sp.VL, random_vector(sp.VL.n_dofs));
  h.coeffs.array() += 2.0;
  double m0 = integral(h);

  Field hH(sp.VH, ops.apply_J(h.coeffs));
  CHECK_THAT(integral(hH), Catch::Matchers::WithinRel(m0, 1e-11));

  Field back(sp.VL, ops.apply_PL(hH.coeffs));
  CHECK_THAT(integral(back), Catch::Matchers::WithinRel(m0, 1e-11));

  FunctionSpace W(mesh, Family::RTcf1);
  Field v = project(W, VectorFn([](const Vec3& x) {
              return Vec3(-0.1 * x[1], 0.1 * x[0], 0.0);
            }));
  RecoveredTransport stepper(ops, 0.1);
  stepper.set_velocity(v);
  Field h1 = h;
  for (int s = 0; s < 3; ++s) h1 = stepper.step(h1);
  CHECK_THAT(integral(h1), Catch::Matchers::WithinRel(m0, 1e-10));
}

TEST_CASE("vector recovered transport preserves the component integrals on a flat torus") {
  Mesh mesh = build_plane_mesh(4, 4, 4.0, 4.0);
  RecoverySpaces sp = vector_recovery_spaces(mesh);
  RecoveryOperators ops = build_recovery(sp.VL, sp.VH, sp.VR, sp.VRb);
  Field v = project(sp.VL, VectorFn([](const Vec3& x) {
              return Vec3(std::cos(M_PI * x[1] / 2.0),
                          std::sin(M_PI * x[0] / 2.0), 0.0);
            }));
  Field F = project(sp.VL, VectorFn([](const Vec3& x) {
              return Vec3(std::sin(M_PI * x[0] / 2.0) + 1.0,
                          std::cos(M_PI * x[1] / 2.0) - 0.5, 0.0);
            }));
  // on a flat mesh each Cartesian component is a transported scalar, so its
  // integral is conserved by the upwind form
  auto component_integrals = [&](const Field& u) {
    QuadratureRule2D vol = tensor_gauss(6);
    Vec3 acc = Vec3::Zero();
    for (index_t c = 0; c < mesh.n_cells(); ++c) {
      CellQuad cq = cell_quad(mesh, c, vol);
      PhysVector T = phys_vector(*u.space->elem, vol.points, cq.geom);
      VecFieldCell vf = eval_vector_field(T, local_coeffs(u, c));
      for (int q = 0; q < cq.nq; ++q) acc += cq.w[q] * vf.val[q];
    }
    return acc;
  };
  Vec3 before = component_integrals(F);
  RecoveredTransport stepper(ops, 0.05);
  stepper.set_velocity(v);
  Field F1 = F;
  for (int s = 0; s < 4; ++s) F1 = stepper.step(F1);
  Vec3 after = component_integrals(F1);
  CHECK((after - before).cwiseAbs().maxCoeff() < 1e-10 * before.cwiseAbs().maxCoeff());
}

TEST_CASE("recovered transport preserves constant fields exactly") {
  Mesh mesh = build_plane_mesh(4, 4, 4.0, 4.0);
  RecoverySpaces sp = vector_recovery_spaces(mesh);
  RecoveryOperators ops = build_recovery(sp.VL, sp.VH, sp.VR, sp.VRb);
  Field v = project(sp.VL, VectorFn([](const Vec3&) { return Vec3(1, 0.5, 0); }));
  Field F = project(sp.VL, VectorFn([](const Vec3&) { return Vec3(2, -1, 0); }));
  RecoveredTransport stepper(ops, 0.1);
  stepper.set_velocity(v);
  Field F1 = stepper.step(F);
  CHECK((F1.coeffs - F.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("recovered transport error shrinks faster than first order") {
  // one advection period of a smooth wave; halving h should cut the error
  // by well over the first-order factor of two
  auto run = [](int n) {
    Mesh mesh = build_plane_mesh(n, n, 8.0, 8.0);
    RecoverySpaces sp = vector_recovery_spaces(mesh);
    RecoveryOperators ops = build_recovery(sp.VL, sp.VH, sp.VR, sp.VRb);
    Field v = project(sp.VL, VectorFn([](const Vec3&) { return Vec3(1, 0, 0); }));
    Field F0 = project(sp.VL, VectorFn([](const Vec3& x) {
                 return Vec3(std::sin(M_PI * x[0] / 4.0),
                             std::cos(M_PI * x[1] / 4.0), 0.0);
               }));
    RecoveredTransport stepper(ops, 0.05);
    stepper.set_velocity(v);
    Field F = F0;
    for (int s = 0; s < 160; ++s) F = stepper.step(F);
    return l2_error(F, F0);
  };
  double e8 = run(8), e16 = run(16);
  CHECK(e8 / e16 > 2.5);
}
