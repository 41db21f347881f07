#pragma once

#include <vector>

#include "abphase/em_fields.hpp"
#include "abphase/field_interaction.hpp"
#include "abphase/trajectory.hpp"
#include "abphase/units.hpp"

namespace abphase {

struct DynamicsConfig {
  double dt = 1e-3;
  double total_time = 1.0;
  int order = 2;  // only the second-order scheme is implemented
  /// Relative kinetic-energy error (against the work done by E) above which
  /// integration stops with InstabilityError.
  double energy_drift_limit = 1e-6;

  void validate() const;
};

/// q (E + v x B / c). Exactly zero outside the core of a static tube.
Vec2 lorentz_force(const ChargeState& charge, const FluxTube& tube, double t,
                   const Units& units = {});

struct IntegrationResult {
  Trajectory trajectory;
  double max_energy_drift = 0.0;      // relative, against the accumulated work
  double max_step_speed_change = 0.0; // relative, per step, in steps with E = 0
};

/// Drift-kick-drift scheme with a Boris rotation for the magnetic part.
IntegrationResult integrate_trajectory(const ChargeState& initial, const FluxTube& tube,
                                       const DynamicsConfig& config, const Units& units = {});

/// One row per sampled time of a conservation check.
struct ResidualSeries {
  std::vector<double> t;
  std::vector<double> lhs;       // first term (e.g. |Q E|)
  std::vector<double> rhs;       // second term (e.g. |dPi/dt|)
  std::vector<double> residual;  // |sum| of the two vector terms
  double max_residual = 0.0;
  double scale = 0.0;            // max |first term|
  double relative() const { return scale > 0.0 ? max_residual / scale : max_residual; }
};

/// Q E + dPi_Q/dt for a charge held at `charge.position` while the tube
/// follows its ramp. dPi/dt is a central difference with step h; samples are
/// placed at `samples` interior points of the ramp at least h from its ends.
ResidualSeries momentum_conservation_check(const ChargeState& charge, const FluxTube& tube,
                                           double t_begin, double t_end, std::size_t samples,
                                           double h, const InteractionOptions& opt = {});

struct FaradayResult {
  double circulation = 0.0;  // line integral of E around the loop
  double expected = 0.0;     // -winding * (1/c) dPhi/dt
  int winding = 0;
  double residual = 0.0;
  double relative = 0.0;     // residual / max(|expected|, |dPhi/dt|/c)
};

/// Throws GeometryError for open loops and for loops that enter a finite core.
FaradayResult faraday_check(const FluxTube& tube, const Trajectory& loop, double t,
                            const Units& units = {});

struct WorkBalance {
  double work_integral = 0.0;  // integral of -q v . E over the ramp
  double momentum_work = 0.0;  // change of v . Pi over the ramp
  double residual = 0.0;
  double relative = 0.0;
};

/// Charge frozen at its position with a fixed velocity label while the tube
/// ramps over [t_begin, t_end]; the work integral uses `steps` midpoint steps.
WorkBalance work_balance_check(const ChargeState& charge, const FluxTube& tube, double t_begin,
                               double t_end, std::size_t steps,
                               const InteractionOptions& opt = {});

}  // namespace abphase
