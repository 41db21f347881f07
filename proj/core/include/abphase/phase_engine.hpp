#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abphase/em_fields.hpp"
#include "abphase/field_interaction.hpp"
#include "abphase/quadrature.hpp"
#include "abphase/trajectory.hpp"
#include "abphase/units.hpp"

namespace abphase {

enum class Theory { local_field, potential };

const char* to_string(Theory t);

/// A phase with its provenance. A local-field result cannot carry a gauge:
/// the only way to make one is PhaseResult::local.
class PhaseResult {
 public:
  static PhaseResult local(double phase, std::string path_id, double error);
  static PhaseResult potential(double phase, std::string gauge_id, std::string path_id,
                               double error, int string_crossings = 0);

  double phase() const { return phase_; }
  Theory theory() const { return theory_; }
  const std::optional<std::string>& gauge() const { return gauge_; }
  const std::string& path_id() const { return path_id_; }
  double error_estimate() const { return error_; }
  /// Net signed Dirac-string crossings counted on a closed path.
  int string_crossings() const { return crossings_; }

 private:
  PhaseResult() = default;
  double phase_ = 0.0;
  Theory theory_ = Theory::local_field;
  std::optional<std::string> gauge_;
  std::string path_id_;
  double error_ = 0.0;
  int crossings_ = 0;
};

struct PhaseOptions {
  quad::Tolerance tol = [] {
    quad::Tolerance t;
    t.rel = 1e-12;
    return t;
  }();
  Units units{};
  /// Options for the field-momentum quadrature of a finite core.
  InteractionOptions interaction{};
};

/// (1/hbar) * line integral of the field momentum. Static tubes only.
PhaseResult phase_local(const Trajectory& traj, const FluxTube& tube, const ChargeState& charge,
                        const PhaseOptions& opt = {});

/// (q / hbar c) * line integral of A. On a closed path every signed crossing
/// of a Dirac string adds its flux; an open path that crosses a string is an
/// error.
PhaseResult phase_potential(const Trajectory& traj, const GaugeSpec& gauge, const FluxTube& tube,
                            const ChargeState& charge, const PhaseOptions& opt = {});

/// q Phi dtheta / (2 pi hbar c).
double analytic_open_phase(double q, double flux, double delta_theta, const Units& units = {});

struct GaugeAuditRow {
  std::string gauge_id;
  double phase = 0.0;          // potential theory
  double error = 0.0;
  double local_phase = 0.0;    // recomputed per row; it takes no gauge
};

struct GaugeAuditReport {
  std::vector<GaugeAuditRow> rows;
  double spread = 0.0;         // max pairwise potential-phase difference
  double local_spread = 0.0;   // same for the local phase
  double local_phase = 0.0;
  bool closed = false;
  double threshold = 0.0;      // spread below which the verdict is invariant
  std::string verdict;         // "gauge-invariant" or "gauge-dependent"
};

/// Relative closed-loop tolerance for the gauge-invariance verdict.
inline constexpr double kClosedLoopEpsilon = 1e-8;

GaugeAuditReport gauge_audit(const Trajectory& traj, const std::vector<GaugeSpec>& gauges,
                             const FluxTube& tube, const ChargeState& charge,
                             const PhaseOptions& opt = {});

/// Audit of the difference phase(path1) - phase(path2).
GaugeAuditReport two_path_gauge_audit(const Trajectory& path1, const Trajectory& path2,
                                      const std::vector<GaugeSpec>& gauges, const FluxTube& tube,
                                      const ChargeState& charge, const PhaseOptions& opt = {});

/// phase(path1) - phase(path2) under `theory`. When the two paths share both
/// end points they are joined into the closed loop path1 + reversed(path2).
PhaseResult two_path_phase_difference(const Trajectory& path1, const Trajectory& path2,
                                      const FluxTube& tube, const ChargeState& charge,
                                      Theory theory,
                                      const std::optional<GaugeSpec>& gauge = std::nullopt,
                                      const PhaseOptions& opt = {});

}  // namespace abphase
