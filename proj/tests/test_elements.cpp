#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <vtm/assembly.hpp>
#include <vtm/solvers.hpp>
#include <vtm/transport_upwind.hpp>

using namespace vtm;

namespace {

std::mt19937 rng(12345);

Eigen::VectorXd random_vector(index_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (index_t i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

Eigen::MatrixXd to_dense(const SparseMatrix& A) {
  return Eigen::MatrixXd(A.to_eigen());
}

} // namespace

TEST_CASE("gauss_legendre: points in [0,1], weights sum to one, exactness") {
  for (int n : {1, 2, 3, 5, 8, 16, 64}) {
    QuadratureRule1D r = gauss_legendre(n);
    REQUIRE(static_cast<int>(r.points.size()) == n);
    double wsum = 0.0;
    for (int q = 0; q < n; ++q) {
      REQUIRE(r.points[q] > 0.0);
      REQUIRE(r.points[q] < 1.0);
      wsum += r.weights[q];
    }
    CHECK_THAT(wsum, Catch::Matchers::WithinAbs(1.0, 1e-14));
    // exact for monomials through degree 2n-1
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int q = 0; q < n; ++q)
        s += r.weights[q] * std::pow(r.points[q], k);
      CHECK_THAT(s, Catch::Matchers::WithinAbs(1.0 / (k + 1), 1e-13));
    }
  }
}

TEST_CASE("tensor_gauss: exact on bivariate monomials") {
  QuadratureRule2D r = tensor_gauss(7);
  for (int p = 0; p <= 7; ++p)
    for (int q = 0; q <= 7; ++q) {
      double s = 0.0;
      for (size_t k = 0; k < r.points.size(); ++k)
        s += r.weights[k] * std::pow(r.points[k][0], p) *
             std::pow(r.points[k][1], q);
      CHECK_THAT(s, Catch::Matchers::WithinAbs(1.0 / ((p + 1) * (q + 1)), 1e-13));
    }
}

TEST_CASE("RTcf1 reference basis: frozen closed forms") {
  // edge order bottom, right, top, left; duals of the unit outward fluxes
  const ReferenceElement& el = element(Family::RTcf1);
  REQUIRE(el.n_dofs() == 4);
  std::vector<Vec2> pts;
  for (double x : {0.0, 0.3, 0.71, 1.0})
    for (double y : {0.0, 0.25, 0.6, 1.0}) pts.push_back(Vec2(x, y));
  Tabulation tab = el.tabulate(pts);
  auto expect = [](int i, const Vec2& p) -> Vec2 {
    switch (i) {
      case 0: return Vec2(0.0, p[1] - 1.0);
      case 1: return Vec2(p[0], 0.0);
      case 2: return Vec2(0.0, p[1]);
      default: return Vec2(p[0] - 1.0, 0.0);
    }
  };
  for (int i = 0; i < 4; ++i)
    for (size_t q = 0; q < pts.size(); ++q) {
      Vec2 e = expect(i, pts[q]);
      CHECK_THAT(tab.v(i, q, 0), Catch::Matchers::WithinAbs(e[0], 1e-13));
      CHECK_THAT(tab.v(i, q, 1), Catch::Matchers::WithinAbs(e[1], 1e-13));
    }
}

TEST_CASE("all families: Kronecker duality of dofs against own basis") {
  for (Family f : {Family::DG0, Family::CG1, Family::CG2, Family::RTcf1,
                   Family::RTcf2, Family::RTce2}) {
    const ReferenceElement& el = element(f);
    int n = el.n_dofs();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto basis_j = [&](const Vec2& x) {
          Tabulation t = el.tabulate({x});
          Eigen::VectorXd v(el.n_comp);
          for (int c = 0; c < el.n_comp; ++c) v[c] = t.v(j, 0, c);
          return v;
        };
        double d = el.apply_dof(i, basis_j);
        CHECK_THAT(d, Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
      }
  }
}

TEST_CASE("RTcf1 unit-cell mass matrix: frozen rational oracle") {
  Mesh mesh = build_plane_mesh(3, 3, 3.0, 3.0); // nine unit-square cells
  const ReferenceElement& el = element(Family::RTcf1);
  QuadratureRule2D vol = tensor_gauss(6);
  CellQuad cq = cell_quad(mesh, 0, vol);
  PhysVector T = phys_vector(el, vol.points, cq.geom);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 4);
  for (int q = 0; q < cq.nq; ++q)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        M(i, j) += cq.w[q] * T.v(q, i).dot(T.v(q, j));
  Eigen::MatrixXd oracle(4, 4);
  oracle << 1.0 / 3, 0, -1.0 / 6, 0,
      0, 1.0 / 3, 0, -1.0 / 6,
      -1.0 / 6, 0, 1.0 / 3, 0,
      0, -1.0 / 6, 0, 1.0 / 3;
  REQUIRE((M - oracle).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("RTcf1 unit-cell basis divergence is one") {
  Mesh mesh = build_plane_mesh(3, 3, 3.0, 3.0);
  QuadratureRule2D vol = tensor_gauss(4);
  CellQuad cq = cell_quad(mesh, 4, vol);
  PhysVector T = phys_vector(element(Family::RTcf1), vol.points, cq.geom);
  for (int q = 0; q < cq.nq; ++q)
    for (int i = 0; i < 4; ++i)
      CHECK_THAT(T.dv(q, i), Catch::Matchers::WithinAbs(1.0, 1e-13));
}

TEST_CASE("mass matrices: symmetric positive definite on curved meshes") {
  Mesh sphere = build_cubed_sphere_mesh(3, 1.0);
  for (Family f : {Family::RTcf1, Family::CG1, Family::DG0, Family::RTcf2}) {
    FunctionSpace V(sphere, f);
    SparseMatrix M = assemble_mass(V, 6);
    Eigen::MatrixXd D = to_dense(M);
    REQUIRE((D - D.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::VectorXd x = random_vector(V.n_dofs);
    REQUIRE(x.dot(D * x) > 0.0);
  }
}

TEST_CASE("mixed mass with equal spaces reproduces the mass matrix") {
  Mesh mesh = build_cylinder_mesh(5, 4, 1.0, 2.0);
  FunctionSpace V(mesh, Family::RTcf1);
  SparseMatrix M = assemble_mass(V, 6);
  SparseMatrix B = assemble_mixed_mass(V, V, 6);
  REQUIRE((to_dense(M) - to_dense(B)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("Piola fields are tangent to the manifold") {
  Mesh sphere = build_cubed_sphere_mesh(3, 2.0);
  QuadratureRule2D vol = tensor_gauss(6);
  for (Family f : {Family::RTcf1, Family::RTcf2, Family::RTce2}) {
    const ReferenceElement& el = element(f);
    for (index_t c : {index_t(0), index_t(7), index_t(33)}) {
      CellQuad cq = cell_quad(sphere, c, vol);
      PhysVector T = phys_vector(el, vol.points, cq.geom);
      for (int q = 0; q < cq.nq; ++q)
        for (int i = 0; i < el.n_dofs(); ++i)
          CHECK(std::abs(T.v(q, i).dot(cq.geom[q].N)) < 1e-12);
    }
  }
}

TEST_CASE("conforming RTcf1: pointwise normal-trace continuity") {
  for (auto mesh : {build_cubed_sphere_mesh(4, 10.0),
                    build_cylinder_mesh(6, 5, 2.0, 7.0)}) {
    FunctionSpace V(mesh, Family::RTcf1);
    Field u(V, random_vector(V.n_dofs));
    QuadratureRule1D line = gauss_legendre(4);
    FacetTabCache tabs = build_facet_tabs(*V.elem, line);
    double worst = 0.0;
    for (index_t f = 0; f < mesh.n_facets(); ++f) {
      const Facet& fc = mesh.facets[f];
      FacetFrame fr = facet_frame(mesh, f, line);
      for (int q = 0; q < fr.nq; ++q) {
        double flux[2];
        for (int side = 0; side < 2; ++side) {
          Eigen::VectorXd lc = local_coeffs(u, fc.cell[side]);
          const Tabulation& t = tabs.at(side, fc.edge[side]);
          Vec3 v = Vec3::Zero();
          for (int i = 0; i < t.n_dofs; ++i)
            v += lc[i] * contravariant_value(t, fr.geom[side][q], i, q);
          flux[side] = v.dot(fr.normal[side][q]);
        }
        worst = std::max(worst, std::abs(flux[0] + flux[1]));
      }
    }
    CHECK(worst < 1e-11);
  }
}

TEST_CASE("Euler characteristics: torus, cylinder, sphere") {
  CHECK(build_plane_mesh(4, 3, 1.0, 1.0).euler_characteristic() == 0);
  CHECK(build_cylinder_mesh(8, 8, 1.0, 5.0).euler_characteristic() == 0);
  CHECK(build_cubed_sphere_mesh(4, 1.0).euler_characteristic() == 2);
}

TEST_CASE("cylinder mesh area: exact chord formula, quadratic convergence") {
  double rho = 100.0 / (2.0 * M_PI), L = 100.0;
  auto exact_chords = [&](int n) {
    return 2.0 * rho * n * std::sin(M_PI / n) * L;
  };
  for (int n : {8, 16}) {
    Mesh mesh = build_cylinder_mesh(n, n, rho, L);
    double a = total_area(mesh);
    CHECK_THAT(a, Catch::Matchers::WithinRel(exact_chords(n), 1e-12));
  }
  double e8 = std::abs(exact_chords(8) - 2.0 * M_PI * rho * L);
  double e16 = std::abs(exact_chords(16) - 2.0 * M_PI * rho * L);
  CHECK_THAT(e8 / e16, Catch::Matchers::WithinRel(4.0, 0.05));
}

TEST_CASE("cubed sphere area converges quadratically to 4 pi r^2") {
  double r = 3.0, exact = 4.0 * M_PI * r * r;
  double e4 = std::abs(total_area(build_cubed_sphere_mesh(4, r)) - exact);
  double e8 = std::abs(total_area(build_cubed_sphere_mesh(8, r)) - exact);
  CHECK(e8 < e4);
  CHECK_THAT(e4 / e8, Catch::Matchers::WithinRel(4.0, 0.25));
}

TEST_CASE("projection reproduces representable fields exactly") {
  Mesh mesh = build_plane_mesh(4, 4, 4.0, 4.0);
  FunctionSpace V(mesh, Family::RTcf1);
  VectorFn f = [](const Vec3&) { return Vec3(1.0, -2.0, 0.0); };
  Field u = project(V, f);
  CHECK(l2_error(u, f) < 1e-12);

  FunctionSpace S(mesh, Family::CG1);
  ScalarFn g = [](const Vec3&) { return 3.5; };
  Field h = project(S, g);
  CHECK(l2_error(h, g) < 1e-12);
  CHECK_THAT(integral(h), Catch::Matchers::WithinRel(3.5 * total_area(mesh), 1e-12));
}

TEST_CASE("l2_error: coincident fields, zero field, triangle inequality") {
  Mesh mesh = build_cylinder_mesh(5, 4, 1.0, 3.0);
  FunctionSpace V(mesh, Family::RTcf1);
  SparseMatrix M = assemble_mass(V, kDefaultQuadDegree);

  Field a(V, random_vector(V.n_dofs));
  CHECK(l2_error(a, a) == 0.0);

  Field zero(V);
  double drn = l2_error(a, zero);
  double quad = std::sqrt(a.coeffs.dot(M * a.coeffs));
  CHECK_THAT(drn, Catch::Matchers::WithinRel(quad, 1e-13));

  for (int trial = 0; trial < 5; ++trial) {
    Field b(V, random_vector(V.n_dofs));
    Field c(V, random_vector(V.n_dofs));
    CHECK(l2_error(a, c) <= l2_error(a, b) + l2_error(b, c) + 1e-13);
  }
}

TEST_CASE("direct sparse factorizations match dense solves") {
  Mesh mesh = build_cubed_sphere_mesh(2, 1.0);
  FunctionSpace V(mesh, Family::RTcf1);
  SparseMatrix M = assemble_mass(V, 6);
  Eigen::VectorXd b = random_vector(V.n_dofs);

  Eigen::MatrixXd D = to_dense(M);
  Eigen::VectorXd dense = D.fullPivLu().solve(b);

  DirectFactorization ldlt(M, true);
  DirectFactorization lu(M, false);
  CHECK((ldlt.solve(b) - dense).norm() < 1e-10 * dense.norm());
  CHECK((lu.solve(b) - dense).norm() < 1e-10 * dense.norm());
}

TEST_CASE("gmres with factored-mass preconditioner matches direct solve") {
  Mesh mesh = build_cylinder_mesh(6, 5, 1.0, 4.0);
  FunctionSpace V(mesh, Family::RTcf1);
  SparseMatrix M = assemble_mass(V, 6);
  // nonsymmetric perturbation of the mass keeps gmres honest
  Field vf = project(V, VectorFn([](const Vec3& x) {
               return Vec3(-x[1], x[0], 0.3);
             }));
  SparseMatrix G = assemble_upwind_form(V, vf);
  SparseMatrix A = add_scaled(1.0, M, 0.01, G);

  Eigen::VectorXd b = random_vector(V.n_dofs);
  DirectFactorization lu(A, false);
  Eigen::VectorXd ref = lu.solve(b);

  DirectFactorization mfac(M, true);
  SolverOptions opts;
  opts.method = SolverMethod::gmres;
  opts.rtol = 1e-12;
  opts.max_iter = 400;
  SolveReport rep;
  Preconditioner prec = [&](const Eigen::VectorXd& r) { return mfac.solve(r); };
  Eigen::VectorXd x = solve_gmres(A, b, opts, &rep, prec);
  REQUIRE(rep.converged);
  CHECK((x - ref).norm() < 1e-10 * ref.norm());
}
