#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "abphase/em_fields.hpp"
#include "abphase/quadrature.hpp"
#include "abphase/trajectory.hpp"
#include "abphase/units.hpp"
#include "abphase/vec.hpp"

namespace abphase {

struct ChargeState {
  double charge = 1.0;
  double mass = 1.0;
  Point2 position{};
  Vec2 velocity{};

  /// |v|/c >= 0.1: the static Coulomb field of the charge is no longer a
  /// good approximation.
  bool relativistic(const Units& units = {}) const;
};

struct InteractionOptions {
  quad::Tolerance tol{};
  Units units{};
};

/// All overlap integrals at one configuration. The local quantities take no
/// gauge; `gauge_used` names the gauge of the potential-side entries.
struct InteractionBreakdown {
  Vec2 field_momentum{};
  double interaction_energy = 0.0;
  double lagrangian_local = 0.0;
  double lagrangian_potential = 0.0;
  double boundary_term = 0.0;
  double boundary_term_error = 0.0;
  std::optional<std::string> gauge_used;
  bool relativistic_warning = false;
};

/// Momentum stored in the overlap of the Coulomb field with B. Closed form
/// for the line flux; 3D quadrature over the core otherwise. Uses
/// `tube.flux` (freeze a ramped tube with FluxTube::at first).
quad::Estimate<Vec2> field_momentum(const ChargeState& charge, const FluxTube& tube,
                                    const InteractionOptions& opt = {});

/// Overlap of the Coulomb field with the induced electric field at time t.
quad::Estimate<double> interaction_energy(const ChargeState& charge, const FluxTube& tube,
                                          double t, const InteractionOptions& opt = {});

/// v . Pi - U at time t.
quad::Estimate<double> lagrangian_local(const ChargeState& charge, const FluxTube& tube,
                                        double t, const InteractionOptions& opt = {});

/// (q/c) v . A; the scalar potential is zero.
double lagrangian_potential(const ChargeState& charge, const GaugeSpec& gauge,
                            const FluxTube& tube, const Units& units = {});

/// (1/4 pi c) * overlap of the Coulomb field with A, including the sheet
/// carried by a Dirac string. Throws DivergentTailError when the integrand
/// does not decay fast enough for the improper integral to converge.
quad::Estimate<double> boundary_term(const ChargeState& charge, const GaugeSpec& gauge,
                                     const FluxTube& tube, const InteractionOptions& opt = {});

InteractionBreakdown interaction_breakdown(const ChargeState& charge, const GaugeSpec& gauge,
                                           const FluxTube& tube, double t,
                                           const InteractionOptions& opt = {});

double field_angular_momentum(double q, double flux, const Units& units = {});

/// v . Pi, the same expression as the first term of lagrangian_local.
quad::Estimate<double> work_to_establish_B(const ChargeState& charge, const FluxTube& tube,
                                           const InteractionOptions& opt = {});

/// Per-sample check of L^f = L + dF/dt along a trajectory of a static tube.
struct IdentityResidual {
  std::vector<double> t;
  std::vector<double> lagrangian_local;
  std::vector<double> lagrangian_potential;
  std::vector<double> boundary_term;
  std::vector<double> dF_dt;
  std::vector<double> residual;
  std::vector<double> error_bar;  // quadrature error of dF/dt
  double max_residual = 0.0;
  double max_error_bar = 0.0;
  double scale = 0.0;  // max |L^f| along the path
};

/// dF/dt by central differences (second-order one-sided at the ends).
IdentityResidual verify_lagrangian_relation(const Trajectory& traj, const GaugeSpec& gauge,
                                            const FluxTube& tube, double charge,
                                            const InteractionOptions& opt = {});

struct IdentityConvergence {
  std::vector<std::size_t> samples;
  std::vector<double> dt;
  std::vector<double> max_residual;
  std::vector<double> error_bar;
  std::vector<double> order;  // log2 ratio between successive levels
  std::vector<bool> graded;   // pair residual above the quadrature error bar
  double scale = 0.0;
  /// Every level pair above the quadrature floor converges at order >= min_order.
  bool second_order = false;
  /// Finest residual relative to scale.
  double finest_relative = 0.0;
};

/// Repeats verify_lagrangian_relation on make(n) for n = base, 2 base - 1,
/// ... (the step halves each level).
IdentityConvergence lagrangian_identity_convergence(
    const std::function<Trajectory(std::size_t)>& make, std::size_t base_samples,
    std::size_t levels, const GaugeSpec& gauge, const FluxTube& tube, double charge,
    const InteractionOptions& opt = {}, double min_order = 1.9);

namespace detail {
/// Integral of cos u over (-pi/2, pi/2): the factor left after the axial
/// direction is integrated in charge-centred coordinates z = sigma tan u.
double axial_factor();
}  // namespace detail

}  // namespace abphase
