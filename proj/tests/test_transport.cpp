#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <vtm/transport_scheme.hpp>

using namespace vtm;

namespace {

std::mt19937 rng(777);

Eigen::VectorXd random_vector(index_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (index_t i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

Eigen::MatrixXd to_dense(const SparseMatrix& A) {
  return Eigen::MatrixXd(A.to_eigen());
}

// Nine unit squares on a periodic plane; cell 0 is [0,1]^2, cell 1 is
// [1,2]x[0,1], and they share exactly the facet x=1.
Mesh unit_cell_torus() { return build_plane_mesh(3, 3, 3.0, 3.0); }

} // namespace

TEST_CASE("vector upwind form: two-cell facet and volume hand oracles") {
  Mesh mesh = unit_cell_torus();
  REQUIRE(mesh.cell_coords[0][0].isApprox(Vec3(0, 0, 0)));
  REQUIRE(mesh.cell_coords[0][2].isApprox(Vec3(1, 1, 0)));
  REQUIRE(mesh.cell_coords[1][0].isApprox(Vec3(1, 0, 0)));

  FunctionSpace V(mesh, Family::RTcf1, Continuity::broken);
  FunctionSpace W(mesh, Family::RTcf1);
  Field v = project(W, VectorFn([](const Vec3&) { return Vec3(1, 0, 0); }));
  Eigen::MatrixXd G = to_dense(assemble_upwind_form(V, v));

  // local dof order (bottom, right, top, left); columns are cell-0 trials
  Eigen::MatrixXd volume(4, 4), facet_c0(4, 4), facet_c1(4, 4);
  volume << 0, 0, 0, 0,
      0, -0.5, 0, 0.5,
      0, 0, 0, 0,
      0, -0.5, 0, 0.5;
  facet_c0 << 1.0 / 3, 0, -1.0 / 6, 0,
      0, 1, 0, 0,
      -1.0 / 6, 0, 1.0 / 3, 0,
      0, 0, 0, 0;
  facet_c1 << -1.0 / 3, 0, 1.0 / 6, 0,
      0, 0, 0, 0,
      1.0 / 6, 0, -1.0 / 3, 0,
      0, 1, 0, 0;

  Eigen::MatrixXd blk00 = G.block(0, 0, 4, 4);
  Eigen::MatrixXd blk10 = G.block(4, 0, 4, 4);
  REQUIRE((blk00 - (volume + facet_c0)).cwiseAbs().maxCoeff() < 1e-13);
  REQUIRE((blk10 - facet_c1).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("scalar upwind form: DG0 facet oracle and zero column sums") {
  Mesh mesh = unit_cell_torus();
  FunctionSpace V(mesh, Family::DG0, Continuity::broken);
  FunctionSpace W(mesh, Family::RTcf1);
  Field v = project(W, VectorFn([](const Vec3&) { return Vec3(1, 0, 0); }));
  Eigen::MatrixXd G = to_dense(assemble_scalar_upwind_form(V, v));

  CHECK_THAT(G(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-13));
  CHECK_THAT(G(1, 0), Catch::Matchers::WithinAbs(-1.0, 1e-13));
  CHECK_THAT(G(0, 2), Catch::Matchers::WithinAbs(-1.0, 1e-13)); // wrap-around inflow
  // total tracer mass is conserved for any concentration
  CHECK(G.colwise().sum().cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("upwind form dissipates the L2 norm for divergence-free velocity") {
  Mesh mesh = unit_cell_torus();
  FunctionSpace W(mesh, Family::RTcf1);
  Field v = project(W, VectorFn([](const Vec3& x) {
              return Vec3(std::cos(2.0 * M_PI * x[1] / 3.0),
                          std::sin(2.0 * M_PI * x[0] / 3.0), 0.0);
            }));
  for (Continuity cont : {Continuity::conforming, Continuity::broken}) {
    FunctionSpace V(mesh, Family::RTcf1, cont);
    Eigen::MatrixXd G = to_dense(assemble_upwind_form(V, v));
    for (int trial = 0; trial < 8; ++trial) {
      Eigen::VectorXd x = random_vector(V.n_dofs);
      CHECK(x.dot(G * x) > -1e-11 * x.squaredNorm());
    }
  }
}

TEST_CASE("trapezoidal upwind step never grows the L2 norm") {
  Mesh mesh = build_cylinder_mesh(6, 6, 1.0, 4.0);
  FunctionSpace V(mesh, Family::RTcf1);
  Field v = project(V, VectorFn([](const Vec3& x) {
              return Vec3(-x[1], x[0], 0.4);
            }));
  UpwindTransport stepper(V, 0.05);
  stepper.set_velocity(v);
  Field F(V, random_vector(V.n_dofs));
  SparseMatrix M = stepper.mass();
  double norm0 = std::sqrt(F.coeffs.dot(M * F.coeffs));
  for (int s = 0; s < 5; ++s) {
    F = stepper.step(F);
    double norm1 = std::sqrt(F.coeffs.dot(M * F.coeffs));
    CHECK(norm1 <= norm0 * (1.0 + 1e-12));
    norm0 = norm1;
  }
}

TEST_CASE("all three schemes are exactly reversible at zero velocity") {
  Mesh mesh = build_cylinder_mesh(6, 6, 100.0 / (2 * M_PI), 100.0);
  for (SchemeKind kind :
       {SchemeKind::benchmark, SchemeKind::recovered, SchemeKind::vorticity}) {
    VectorTransportScheme scheme(kind, mesh, 0.05);
    const FunctionSpace& V = scheme.space();
    Field zero(V);
    Field F(V, random_vector(V.n_dofs));
    scheme.set_velocity(zero);
    scheme.reset_state(F);
    Field F1 = scheme.step(F);
    INFO("scheme " << scheme_name(kind));
    CHECK((F1.coeffs - F.coeffs).cwiseAbs().maxCoeff() <
          1e-10 * F.coeffs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("gmres stepper reproduces the direct stepper") {
  Mesh mesh = build_cylinder_mesh(6, 6, 1.0, 4.0);
  FunctionSpace V(mesh, Family::RTcf1);
  Field v = project(V, VectorFn([](const Vec3& x) {
              return Vec3(-x[1], x[0], 0.2);
            }));
  Field F(V, random_vector(V.n_dofs));

  StepperOptions direct;
  UpwindTransport a(V, 0.1, direct);
  a.set_velocity(v);

  StepperOptions gmres;
  gmres.method = SolverMethod::gmres;
  gmres.rtol = 1e-12;
  UpwindTransport b(V, 0.1, gmres);
  b.set_velocity(v);

  Eigen::VectorXd xa = a.step(F).coeffs;
  Eigen::VectorXd xb = b.step(F).coeffs;
  CHECK((xa - xb).norm() < 1e-10 * xa.norm());
}

TEST_CASE("trapezoidal stepping is second order in time") {
  Mesh mesh = build_plane_mesh(4, 4, 4.0, 4.0);
  FunctionSpace V(mesh, Family::RTcf1);
  Field v = project(V, VectorFn([](const Vec3&) { return Vec3(1, 0, 0); }));
  Field F0 = project(V, VectorFn([](const Vec3& x) {
               return Vec3(std::sin(M_PI * x[0] / 2.0) + 2.0,
                           std::cos(M_PI * x[1] / 2.0), 0.0);
             }));

  auto run = [&](double dt, int steps) {
    UpwindTransport stepper(V, dt);
    stepper.set_velocity(v);
    Field F = F0;
    for (int s = 0; s < steps; ++s) F = stepper.step(F);
    return F;
  };
  Field ref = run(0.0125, 80);
  double e1 = l2_error(run(0.1, 10), ref);
  double e2 = l2_error(run(0.05, 20), ref);
  CHECK(e1 / e2 > 3.2);
  CHECK(e1 / e2 < 4.8);
}
