#pragma once

/// Deformational transport test cases on the periodic cylinder and the
/// cubed sphere, a scheme-agnostic stepper wrapper, and convergence-sweep
/// drivers shared by the command line tools and the acceptance tests.
///
/// Both cases advect a Gaussian vector hill with a velocity that returns
/// it to its starting position, so the projected initial state is the
/// exact discrete reference and errors are measured field against field.
///
/// Cylinder (radius rho = L/2pi, length L, doubly periodic): a solid
/// rotation U around the axis plus a time-reversing deformational wave,
///   v_phi = U + 2 pi W sin(phi') sin(2 pi z / L) cos(pi t / T),
///   v_z   = (W L / rho) cos(phi') cos(2 pi z / L) cos(pi t / T),
/// with phi' = phi - U t / rho the co-rotating angle and W = U/10.
///
/// Sphere (radius r): four half-rotations, alternating the axis,
///   z-axis (U cos(theta), 0)            for t in [0,T/2] and (T,3T/2],
///   x-axis (-U cos(lambda) sin(theta), U sin(lambda))  otherwise,
/// each a rigid rotation, U = 2 pi r / T, run length 2T. Components are
/// given in the (e_lambda, e_theta) frame.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vtm/assembly.hpp"
#include "vtm/io.hpp"
#include "vtm/mesh.hpp"
#include "vtm/transport_scheme.hpp"

namespace vtm {

/// Repeated L2 projection into one space: the mass matrix is factored once.
class Projector {
 public:
  explicit Projector(const FunctionSpace& V, int quad_degree = kDefaultQuadDegree)
      : V_(&V), deg_(quad_degree), fac_(assemble_mass(V, quad_degree), true) {}

  Field operator()(const VectorFn& f) const {
    return Field(*V_, fac_.solve(assemble_rhs(*V_, f, deg_)));
  }
  Field operator()(const ScalarFn& f) const {
    return Field(*V_, fac_.solve(assemble_rhs(*V_, f, deg_)));
  }
  const FunctionSpace& space() const { return *V_; }

 private:
  const FunctionSpace* V_;
  int deg_;
  DirectFactorization fac_;
};

namespace testcase {

inline constexpr double kPi = 3.14159265358979323846;

struct CylinderCase {
  double L = 100.0;
  double T = 100.0;
  double F0 = 3.0;
  double l0 = 0.1;
  double phi_c = kPi / 4.0;
  double z_c = 50.0;

  double rho() const { return L / (2.0 * kPi); }
  double U() const { return 2.0 * kPi * rho() / T; }
  double W() const { return U() / 10.0; }
  double duration() const { return T; }

  Mesh mesh(int n) const { return build_cylinder_mesh(n, n, rho(), L); }

  VectorFn velocity(double t) const {
    double rho_ = rho(), U_ = U(), W_ = W(), L_ = L, T_ = T;
    return [=](const Vec3& x) {
      double phi = std::atan2(x[1], x[0]);
      double z = x[2];
      double phip = phi - U_ * t / rho_;
      double vphi = U_ + 2.0 * kPi * W_ * std::sin(phip) *
                             std::sin(2.0 * kPi * z / L_) *
                             std::cos(kPi * t / T_);
      double vz = (W_ * L_ / rho_) * std::cos(phip) *
                  std::cos(2.0 * kPi * z / L_) * std::cos(kPi * t / T_);
      Vec3 e_phi(-std::sin(phi), std::cos(phi), 0.0);
      return Vec3(vphi * e_phi + vz * Vec3(0.0, 0.0, 1.0));
    };
  }

  /// Gaussian hill in the periodic chart metric, directed along
  /// e_phi + e_z; also the exact solution at t = T.
  VectorFn initial() const {
    double L_ = L, F0_ = F0, l0_ = l0, pc = phi_c, zc = z_c;
    return [=](const Vec3& x) {
      double phi = std::atan2(x[1], x[0]);
      double z = x[2];
      double dphi = std::acos(std::clamp(std::cos(phi - pc), -1.0, 1.0));
      double dz = std::acos(
          std::clamp(std::cos(2.0 * kPi * (z - zc) / L_), -1.0, 1.0));
      double l2 = dphi * dphi + dz * dz;
      double amp = F0_ * std::exp(-l2 / (l0_ * l0_));
      Vec3 e_phi(-std::sin(phi), std::cos(phi), 0.0);
      return Vec3(amp * (e_phi + Vec3(0.0, 0.0, 1.0)));
    };
  }
};

struct SphereCase {
  double r = 100.0;
  double T = 200.0;
  double F0 = 3.0;
  double l0 = 0.25;
  double lambda_c = 0.0;
  double theta_c = -kPi / 6.0;

  double U() const { return 2.0 * kPi * r / T; }
  double duration() const { return 2.0 * T; }

  Mesh mesh(int n_panel) const { return build_cubed_sphere_mesh(n_panel, r); }

  /// Half-rotation index 0..3; the velocity is steady within each phase.
  int phase(double t) const {
    int p = static_cast<int>(std::floor(2.0 * t / T));
    return std::clamp(p, 0, 3);
  }

  VectorFn velocity(double t) const {
    bool z_axis = phase(t) % 2 == 0;
    double U_ = U();
    return [=](const Vec3& x) {
      double lambda = std::atan2(x[1], x[0]);
      double theta = std::atan2(x[2], std::hypot(x[0], x[1]));
      Vec3 e_lam(-std::sin(lambda), std::cos(lambda), 0.0);
      if (z_axis) return Vec3(U_ * std::cos(theta) * e_lam);
      Vec3 e_th(-std::sin(theta) * std::cos(lambda),
                -std::sin(theta) * std::sin(lambda), std::cos(theta));
      return Vec3(-U_ * std::cos(lambda) * std::sin(theta) * e_lam +
                  U_ * std::sin(lambda) * e_th);
    };
  }

  /// Gaussian hill in great-circle distance from (lambda_c, theta_c),
  /// directed along e_theta; also the exact solution at t = 2T.
  VectorFn initial() const {
    double F0_ = F0, l0_ = l0, lc = lambda_c, tc = theta_c;
    return [=](const Vec3& x) {
      double lambda = std::atan2(x[1], x[0]);
      double theta = std::atan2(x[2], std::hypot(x[0], x[1]));
      double cl = std::sin(tc) * std::sin(theta) +
                  std::cos(tc) * std::cos(theta) * std::cos(lambda - lc);
      double l = std::acos(std::clamp(cl, -1.0, 1.0));
      double amp = F0_ * std::exp(-l * l / (l0_ * l0_));
      Vec3 e_th(-std::sin(theta) * std::cos(lambda),
                -std::sin(theta) * std::sin(lambda), std::cos(theta));
      return Vec3(amp * e_th);
    };
  }
};

using vtm::parse_scheme;
using vtm::scheme_name;
using vtm::SchemeKind;
using vtm::VectorTransportScheme;

struct TransportRunConfig {
  SchemeKind scheme = SchemeKind::benchmark;
  bool supg = true;
  int n = 16;
  double dt = 0.05;
  StepperOptions stepper;
  std::string out_dir; // empty: no files written
  std::string tag;
  std::map<std::string, std::string> metadata;
};

struct TransportRunResult {
  int n = 0;
  double h = 0.0;
  double dt = 0.0;
  int steps = 0;
  double error = 0.0;
  double initial_norm = 0.0;
  double relative = 0.0;
  double max_step_dissipation = 0.0;
  double min_step_dissipation = 0.0;
  double seconds = 0.0;
};

namespace detail {

inline void emit_snapshot(const std::string& out_dir, const std::string& tag,
                          const std::string& stamp, const Mesh& mesh,
                          const Field& F, const Field* zeta) {
  std::vector<VtkCellField> fields;
  fields.push_back({"F", cell_centre_vectors(F), {}});
  if (zeta) fields.push_back({"zeta", {}, cell_centre_scalars(*zeta)});
  write_vtk(out_dir + "/" + tag + "_" + stamp + ".vtk", mesh, fields);
}

inline void emit_summary(const std::string& out_dir, const std::string& tag,
                         const std::map<std::string, std::string>& metadata,
                         const TransportRunResult& r) {
  CsvWriter csv(out_dir + "/" + tag + "_summary.csv", metadata,
                {"n", "dt", "steps", "error", "initial_norm", "relative",
                 "seconds"});
  csv.row({static_cast<double>(r.n), r.dt, static_cast<double>(r.steps),
           r.error, r.initial_norm, r.relative, r.seconds});
}

/// Shared stepping loop. `velocity_epoch(t_mid)` keys reprojection: the
/// velocity is rebuilt only when the key changes (-1 forces every step).
template <class Case, class EpochFn>
TransportRunResult run_transport(const Case& tc, const TransportRunConfig& cfg,
                                 const EpochFn& velocity_epoch) {
  auto t_start = std::chrono::steady_clock::now();
  Mesh mesh = tc.mesh(cfg.n);
  VectorTransportScheme scheme(cfg.scheme, mesh, cfg.dt,
                               SUPGConfig{cfg.supg, 0.5}, cfg.stepper);
  Projector proj(scheme.space());

  Field F = proj(tc.initial());
  Field F_ref = F;
  scheme.reset_state(F);

  double duration = tc.duration();
  int steps = static_cast<int>(std::lround(duration / cfg.dt));
  require(steps > 0 && std::abs(steps * cfg.dt - duration) < 1e-9 * duration,
          "transport run: dt must divide the run length");

  bool emit = !cfg.out_dir.empty();
  if (emit) {
    std::filesystem::create_directories(cfg.out_dir);
    emit_snapshot(cfg.out_dir, cfg.tag, "initial", mesh, F,
                  scheme.vorticity_state());
  }

  TransportRunResult res;
  res.n = cfg.n;
  res.h = 1.0 / cfg.n;
  res.dt = cfg.dt;
  res.steps = steps;

  long epoch = std::numeric_limits<long>::min();
  for (int s = 0; s < steps; ++s) {
    double t_mid = (s + 0.5) * cfg.dt;
    long key = velocity_epoch(t_mid);
    if (key != epoch || key < 0) {
      scheme.set_velocity(proj(tc.velocity(t_mid)));
      epoch = key;
    }
    F = scheme.step(F);
    if (scheme.kind() == SchemeKind::vorticity) {
      double d = scheme.last_dissipation();
      res.max_step_dissipation = s == 0 ? d : std::max(res.max_step_dissipation, d);
      res.min_step_dissipation = s == 0 ? d : std::min(res.min_step_dissipation, d);
    }
    if (emit && s + 1 == steps / 2)
      emit_snapshot(cfg.out_dir, cfg.tag, "mid", mesh, F,
                    scheme.vorticity_state());
  }

  res.error = l2_error(F, F_ref);
  res.initial_norm = l2_norm(F_ref);
  res.relative = res.error / res.initial_norm;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t_start).count();
  if (emit) {
    emit_snapshot(cfg.out_dir, cfg.tag, "final", mesh, F,
                  scheme.vorticity_state());
    emit_summary(cfg.out_dir, cfg.tag, cfg.metadata, res);
  }
  return res;
}

} // namespace detail

/// Cylinder run: the deformational wave varies continuously in time, so
/// the velocity is reprojected at the midpoint of every step.
inline TransportRunResult run_cylinder_transport(const CylinderCase& tc,
                                                 const TransportRunConfig& cfg) {
  return detail::run_transport(tc, cfg, [](double) { return -1L; });
}

/// Sphere run: the velocity is steady within each half-rotation, so it is
/// projected once per phase and the factorizations are reused.
inline TransportRunResult run_sphere_transport(const SphereCase& tc,
                                               const TransportRunConfig& cfg) {
  return detail::run_transport(
      tc, cfg, [&tc](double t) { return static_cast<long>(tc.phase(t)); });
}

/// Least-squares slope of log(error) against log(h).
inline double fit_slope(const std::vector<double>& h,
                        const std::vector<double>& err) {
  require(h.size() == err.size() && h.size() >= 3,
          "convergence fit: need at least three resolutions");
  size_t m = h.size();
  double xbar = 0, ybar = 0;
  std::vector<double> xs(m), ys(m);
  for (size_t i = 0; i < m; ++i) {
    require(h[i] > 0 && err[i] > 0, "convergence fit: positive data required");
    xs[i] = std::log(h[i]);
    ys[i] = std::log(err[i]);
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= m;
  ybar /= m;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < m; ++i) {
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
  }
  return sxy / sxx;
}

struct ConvergenceReport {
  std::vector<TransportRunResult> runs;
  double slope = 0.0;

  void finalize() {
    std::vector<double> h, e;
    for (const auto& r : runs) {
      h.push_back(r.h);
      e.push_back(r.error);
    }
    slope = fit_slope(h, e);
  }

  void write_csv(const std::string& path,
                 const std::map<std::string, std::string>& metadata) const {
    std::map<std::string, std::string> md = metadata;
    md["slope"] = format_g17(slope);
    CsvWriter csv(path, md,
                  {"n", "h", "dt", "steps", "error", "relative", "seconds"});
    for (const auto& r : runs)
      csv.row({static_cast<double>(r.n), r.h, r.dt,
               static_cast<double>(r.steps), r.error, r.relative, r.seconds});
  }
};

} // namespace testcase
} // namespace vtm
