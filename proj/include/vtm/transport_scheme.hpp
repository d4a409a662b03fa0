#pragma once

/// One interface over the three vector transport schemes so drivers and
/// the shallow-water model can treat the transport substep as a black box.

#include <memory>
#include <optional>
#include <string>

#include "vtm/recovery.hpp"
#include "vtm/transport_upwind.hpp"
#include "vtm/vorticity_scheme.hpp"

namespace vtm {

enum class SchemeKind { benchmark, recovered, vorticity };

inline SchemeKind parse_scheme(const std::string& s) {
  if (s == "benchmark") return SchemeKind::benchmark;
  if (s == "recovered") return SchemeKind::recovered;
  if (s == "vorticity") return SchemeKind::vorticity;
  require(false, "unknown scheme: " + s);
  return SchemeKind::benchmark;
}

inline std::string scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::benchmark: return "benchmark";
    case SchemeKind::recovered: return "recovered";
    case SchemeKind::vorticity: return "vorticity";
  }
  return "?";
}

/// Owns the function spaces of the selected scheme; initial data and
/// velocities are projected into `space()` (the lowest-order flux space).
class VectorTransportScheme {
 public:
  VectorTransportScheme(SchemeKind kind, const Mesh& mesh, double dt,
                        SUPGConfig supg = {}, StepperOptions opts = {})
      : kind_(kind) {
    switch (kind) {
      case SchemeKind::benchmark:
        VL_ = std::make_unique<FunctionSpace>(mesh, Family::RTcf1,
                                              Continuity::conforming);
        bench_.emplace(*VL_, dt, opts);
        break;
      case SchemeKind::recovered:
        rsp_ = std::make_unique<RecoverySpaces>(vector_recovery_spaces(mesh));
        rops_ = std::make_unique<RecoveryOperators>(
            build_recovery(rsp_->VL, rsp_->VH, rsp_->VR, rsp_->VRb));
        rec_.emplace(*rops_, dt, opts);
        break;
      case SchemeKind::vorticity:
        VL_ = std::make_unique<FunctionSpace>(mesh, Family::RTcf1,
                                              Continuity::conforming);
        Vz_ = std::make_unique<FunctionSpace>(mesh, Family::CG1,
                                              Continuity::conforming);
        vort_.emplace(*VL_, *Vz_, dt, supg, opts);
        break;
    }
  }

  SchemeKind kind() const { return kind_; }

  const FunctionSpace& space() const {
    return kind_ == SchemeKind::recovered ? rsp_->VL : *VL_;
  }

  void set_velocity(const Field& v) {
    switch (kind_) {
      case SchemeKind::benchmark: bench_->set_velocity(v); break;
      case SchemeKind::recovered: rec_->set_velocity(v); break;
      case SchemeKind::vorticity: vort_->set_velocity(v); break;
    }
  }

  /// Prepares auxiliary state for stepping from F; for the vorticity
  /// scheme this derives the discrete vorticity, and each call is counted.
  void reset_state(const Field& F) {
    if (kind_ == SchemeKind::vorticity) {
      zeta_ = vort_->init_vorticity(F);
      ++vorticity_resets_;
    }
  }

  Field step(const Field& F) {
    switch (kind_) {
      case SchemeKind::benchmark: return bench_->step(F);
      case SchemeKind::recovered: return rec_->step(F);
      case SchemeKind::vorticity: {
        require(zeta_.has_value(), "scheme step: vorticity state not set");
        auto [F1, z1] = vort_->step(F, *zeta_);
        zeta_ = z1;
        last_dissipation_ = vort_->supg_dissipation(*zeta_);
        return F1;
      }
    }
    return F;
  }

  const Field* vorticity_state() const { return zeta_ ? &*zeta_ : nullptr; }
  double last_dissipation() const { return last_dissipation_; }
  int vorticity_resets() const { return vorticity_resets_; }

  const VorticityTransport& vorticity_scheme() const { return *vort_; }
  const RecoveryOperators& recovery() const { return *rops_; }

 private:
  SchemeKind kind_;
  std::unique_ptr<FunctionSpace> VL_, Vz_;
  std::unique_ptr<RecoverySpaces> rsp_;
  std::unique_ptr<RecoveryOperators> rops_;
  std::optional<UpwindTransport> bench_;
  std::optional<RecoveredTransport> rec_;
  std::optional<VorticityTransport> vort_;
  std::optional<Field> zeta_;
  double last_dissipation_ = 0.0;
  int vorticity_resets_ = 0;
};

} // namespace vtm
