#include "abphase/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abphase/errors.hpp"

namespace abphase {

void DynamicsConfig::validate() const {
  if (!(dt > 0.0)) throw GeometryError("dynamics: dt must be positive");
  if (!(total_time >= dt)) throw GeometryError("dynamics: total_time must be at least dt");
  if (order != 2) throw GeometryError("dynamics: only order 2 is available");
}

Vec2 lorentz_force(const ChargeState& charge, const FluxTube& tube, double t, const Units& units) {
  const FluxTube now = tube.at(t);
  const double B = magnetic_field(now, charge.position);
  Vec2 E{};
  if (now.flux_rate != 0.0) E = induced_electric_field(tube, charge.position, t, units);
  // v x B z-hat = (v_y B, -v_x B)
  const Vec2 vxB{charge.velocity.y * B, -charge.velocity.x * B};
  if (B == 0.0 && E == Vec2{}) return Vec2{};
  return (E + vxB / units.c) * charge.charge;
}

IntegrationResult integrate_trajectory(const ChargeState& initial, const FluxTube& tube,
                                       const DynamicsConfig& config, const Units& units) {
  config.validate();
  if (!(initial.mass > 0.0)) throw GeometryError("dynamics: mass must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(config.total_time / config.dt));
  const double dt = config.total_time / static_cast<double>(steps);
  const double qm = initial.charge / initial.mass;

  std::vector<TrajectorySample> out;
  out.reserve(steps + 1);
  Point2 x = initial.position;
  Vec2 v = initial.velocity;
  double t = 0.0;
  out.push_back({t, x, v});

  IntegrationResult res;
  const double ke0 = 0.5 * initial.mass * dot(v, v);
  double work = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Point2 xm = x + v * (0.5 * dt);
    const double tm = t + 0.5 * dt;
    const FluxTube now = tube.at(tm);
    const double B = magnetic_field(now, xm);
    Vec2 E{};
    if (now.flux_rate != 0.0) E = induced_electric_field(tube, xm, tm, units);

    const Vec2 v_old = v;
    Vec2 vm = v + E * (0.5 * dt * qm);
    if (B != 0.0) {
      // dv/dt = (qB/mc) (v_y, -v_x): clockwise rotation for qB > 0.
      const double tb = -qm * B / units.c * 0.5 * dt;
      const double sb = 2.0 * tb / (1.0 + tb * tb);
      const Vec2 vp = vm + perp(vm) * tb;
      vm = vm + perp(vp) * sb;
    }
    v = vm + E * (0.5 * dt * qm);
    if (E == Vec2{} && norm(v_old) > 0.0) {
      res.max_step_speed_change =
          std::max(res.max_step_speed_change, std::abs(norm(v) - norm(v_old)) / norm(v_old));
    }
    work += initial.charge * dot(E, 0.5 * (v + v_old)) * dt;
    x = xm + v * (0.5 * dt);
    t = static_cast<double>(k + 1) * dt;
    out.push_back({t, x, v});

    const double ke = 0.5 * initial.mass * dot(v, v);
    const double ref = std::max({ke0, ke, std::abs(work), std::numeric_limits<double>::min()});
    const double drift = std::abs(ke - ke0 - work) / ref;
    res.max_energy_drift = std::max(res.max_energy_drift, drift);
    if (!(drift <= config.energy_drift_limit)) {
      throw InstabilityError("integrate_trajectory: energy drift " + std::to_string(drift) +
                                 " exceeds limit at t=" + std::to_string(t) + "; reduce dt",
                             drift);
    }
  }
  res.trajectory = Trajectory(std::move(out), false, "dynamics");
  return res;
}

ResidualSeries momentum_conservation_check(const ChargeState& charge, const FluxTube& tube,
                                           double t_begin, double t_end, std::size_t samples,
                                           double h, const InteractionOptions& opt) {
  if (!(t_end > t_begin) || samples < 1) throw GeometryError("momentum check: empty window");
  if (!(h > 0.0) || 2.0 * h >= t_end - t_begin) throw GeometryError("momentum check: bad step h");
  ResidualSeries s;
  const double lo = t_begin + h;
  const double hi = t_end - h;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
    const Vec2 QE = induced_electric_field(tube, charge.position, t, opt.units) * charge.charge;
    const Vec2 p_plus = field_momentum(charge, tube.at(t + h), opt).value;
    const Vec2 p_minus = field_momentum(charge, tube.at(t - h), opt).value;
    const Vec2 dPi = (p_plus - p_minus) / (2.0 * h);
    s.t.push_back(t);
    s.lhs.push_back(norm(QE));
    s.rhs.push_back(norm(dPi));
    s.residual.push_back(norm(QE + dPi));
    s.max_residual = std::max(s.max_residual, s.residual.back());
    s.scale = std::max(s.scale, norm(QE));
  }
  return s;
}

FaradayResult faraday_check(const FluxTube& tube, const Trajectory& loop, double t,
                            const Units& units) {
  if (!loop.closed()) throw GeometryError("faraday_check: loop must be closed");
  if (tube.radius > 0.0) {
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
      const Point2 a = loop[i].position;
      const Point2 b = loop[i + 1].position;
      const Vec2 ab = b - a;
      const double s = std::clamp(dot(tube.center - a, ab) / std::max(dot(ab, ab), 1e-300), 0.0, 1.0);
      if (norm(a + ab * s - tube.center) < tube.radius) {
        throw GeometryError("faraday_check: loop enters the flux tube core");
      }
    }
  }
  FaradayResult r;
  quad::Tolerance tol;
  tol.rel = 1e-13;
  r.circulation = integrate_along(
                      loop, [&](const Point2& p) { return induced_electric_field(tube, p, t, units); },
                      tol)
                      .value;
  const double w = subtended_angle(loop, tube.center) / (2.0 * std::numbers::pi);
  r.winding = static_cast<int>(std::lround(w));
  const double rate = tube.flux_rate_at(t) / units.c;
  r.expected = -r.winding * rate;
  r.residual = std::abs(r.circulation - r.expected);
  const double ref = std::max(std::abs(r.expected), std::abs(rate));
  r.relative = ref > 0.0 ? r.residual / ref : r.residual;
  return r;
}

WorkBalance work_balance_check(const ChargeState& charge, const FluxTube& tube, double t_begin,
                               double t_end, std::size_t steps, const InteractionOptions& opt) {
  if (!(t_end > t_begin) || steps < 1) throw GeometryError("work balance: empty window");
  WorkBalance w;
  const double dt = (t_end - t_begin) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double tm = t_begin + (static_cast<double>(k) + 0.5) * dt;
    const Vec2 E = induced_electric_field(tube, charge.position, tm, opt.units);
    w.work_integral += -charge.charge * dot(charge.velocity, E) * dt;
  }
  const double end = work_to_establish_B(charge, tube.at(t_end), opt).value;
  const double start = work_to_establish_B(charge, tube.at(t_begin), opt).value;
  w.momentum_work = end - start;
  w.residual = std::abs(w.work_integral - w.momentum_work);
  const double ref = std::max(std::abs(w.momentum_work), std::abs(w.work_integral));
  w.relative = ref > 0.0 ? w.residual / ref : w.residual;
  return w;
}

}  // namespace abphase
