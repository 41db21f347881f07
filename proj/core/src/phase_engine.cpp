#include "abphase/phase_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abphase/errors.hpp"

namespace abphase {

namespace {

constexpr double kJoinTol = 1e-12;

bool same_point(const Point2& a, const Point2& b) {
  return norm(a - b) <= kJoinTol * std::max(1.0, norm(a));
}

void require_static(const FluxTube& tube, const char* what) {
  if (!tube.is_static()) {
    throw GeometryError(std::string(what) + ": phase accumulation requires a static flux tube");
  }
}

std::string path_label(const Trajectory& t) {
  return t.metadata().empty() ? std::string("path") : t.metadata();
}

GaugeAuditReport finish_report(GaugeAuditReport r) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double llo = lo;
  double lhi = -lo;
  double scale = 1.0;
  for (const auto& row : r.rows) {
    lo = std::min(lo, row.phase);
    hi = std::max(hi, row.phase);
    llo = std::min(llo, row.local_phase);
    lhi = std::max(lhi, row.local_phase);
    scale = std::max(scale, std::abs(row.phase));
  }
  r.spread = hi - lo;
  r.local_spread = lhi - llo;
  r.local_phase = r.rows.front().local_phase;
  r.threshold = kClosedLoopEpsilon * scale;
  r.verdict = r.spread < r.threshold ? "gauge-invariant" : "gauge-dependent";
  return r;
}

}  // namespace

const char* to_string(Theory t) {
  return t == Theory::local_field ? "local-field" : "potential";
}

PhaseResult PhaseResult::local(double phase, std::string path_id, double error) {
  PhaseResult r;
  r.phase_ = phase;
  r.theory_ = Theory::local_field;
  r.path_id_ = std::move(path_id);
  r.error_ = error;
  return r;
}

PhaseResult PhaseResult::potential(double phase, std::string gauge_id, std::string path_id,
                                   double error, int string_crossings) {
  PhaseResult r;
  r.phase_ = phase;
  r.theory_ = Theory::potential;
  r.gauge_ = std::move(gauge_id);
  r.path_id_ = std::move(path_id);
  r.error_ = error;
  r.crossings_ = string_crossings;
  return r;
}

PhaseResult phase_local(const Trajectory& traj, const FluxTube& tube, const ChargeState& charge,
                        const PhaseOptions& opt) {
  require_static(tube, "phase_local");
  const double hbar = opt.units.hbar;
  double extra_error = 0.0;
  auto pi_at = [&](const Point2& p) {
    ChargeState cs = charge;
    cs.position = p;
    const auto est = field_momentum(cs, tube, opt.interaction);
    extra_error += est.error;
    return est.value;
  };
  const auto est = integrate_along(traj, pi_at, opt.tol);
  // Quadrature error of the finite-core momentum enters once per unit path
  // length; bound it by the mean per-node error times the path length.
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) length += norm(traj[i + 1].position - traj[i].position);
  const double node_error = est.evaluations ? extra_error / static_cast<double>(est.evaluations) : 0.0;
  return PhaseResult::local(est.value / hbar, path_label(traj),
                            (est.error + node_error * length) / hbar);
}

PhaseResult phase_potential(const Trajectory& traj, const GaugeSpec& gauge, const FluxTube& tube,
                            const ChargeState& charge, const PhaseOptions& opt) {
  require_static(tube, "phase_potential");
  const auto est = integrate_along(
      traj, [&](const Point2& p) { return vector_potential_regular(gauge, tube, p); }, opt.tol);
  double value = est.value;
  int crossings = 0;
  if (const auto* g = std::get_if<DiracStringGauge>(&gauge.base)) {
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
      crossings += string_crossing_sign(*g, tube, traj[i].position, traj[i + 1].position);
      if (!traj.closed() && crossings != 0) {
        throw SingularityError("phase_potential: open path crosses the Dirac string between samples " +
                               std::to_string(i) + " and " + std::to_string(i + 1));
      }
    }
    value += crossings * tube.flux;
  }
  const double k = charge.charge / (opt.units.hbar * opt.units.c);
  return PhaseResult::potential(k * value, gauge.id(), path_label(traj), std::abs(k) * est.error,
                                crossings);
}

double analytic_open_phase(double q, double flux, double delta_theta, const Units& units) {
  return q * flux * delta_theta / (2.0 * std::numbers::pi * units.hbar * units.c);
}

GaugeAuditReport gauge_audit(const Trajectory& traj, const std::vector<GaugeSpec>& gauges,
                             const FluxTube& tube, const ChargeState& charge,
                             const PhaseOptions& opt) {
  if (gauges.size() < 2) throw GeometryError("gauge_audit: need at least two gauges");
  GaugeAuditReport r;
  r.closed = traj.closed();
  for (const auto& g : gauges) {
    const auto pot = phase_potential(traj, g, tube, charge, opt);
    const auto loc = phase_local(traj, tube, charge, opt);
    r.rows.push_back({g.id(), pot.phase(), pot.error_estimate(), loc.phase()});
  }
  return finish_report(std::move(r));
}

GaugeAuditReport two_path_gauge_audit(const Trajectory& path1, const Trajectory& path2,
                                      const std::vector<GaugeSpec>& gauges, const FluxTube& tube,
                                      const ChargeState& charge, const PhaseOptions& opt) {
  if (gauges.size() < 2) throw GeometryError("two_path_gauge_audit: need at least two gauges");
  GaugeAuditReport r;
  r.closed = same_point(path1.front().position, path2.front().position) &&
             same_point(path1.back().position, path2.back().position);
  for (const auto& g : gauges) {
    const auto pot = two_path_phase_difference(path1, path2, tube, charge, Theory::potential, g, opt);
    const auto loc =
        two_path_phase_difference(path1, path2, tube, charge, Theory::local_field, std::nullopt, opt);
    r.rows.push_back({g.id(), pot.phase(), pot.error_estimate(), loc.phase()});
  }
  return finish_report(std::move(r));
}

PhaseResult two_path_phase_difference(const Trajectory& path1, const Trajectory& path2,
                                      const FluxTube& tube, const ChargeState& charge,
                                      Theory theory, const std::optional<GaugeSpec>& gauge,
                                      const PhaseOptions& opt) {
  if (theory == Theory::potential && !gauge) {
    throw GeometryError("two_path_phase_difference: the potential theory needs a gauge");
  }
  const bool loop = same_point(path1.front().position, path2.front().position) &&
                    same_point(path1.back().position, path2.back().position);
  const std::string id = path_label(path1) + " - " + path_label(path2);
  if (loop) {
    const Trajectory closed = concatenate(path1, reversed(path2));
    if (theory == Theory::local_field) {
      const auto r = phase_local(closed, tube, charge, opt);
      return PhaseResult::local(r.phase(), id, r.error_estimate());
    }
    const auto r = phase_potential(closed, *gauge, tube, charge, opt);
    return PhaseResult::potential(r.phase(), gauge->id(), id, r.error_estimate(),
                                  r.string_crossings());
  }
  if (theory == Theory::local_field) {
    const auto a = phase_local(path1, tube, charge, opt);
    const auto b = phase_local(path2, tube, charge, opt);
    return PhaseResult::local(a.phase() - b.phase(), id, a.error_estimate() + b.error_estimate());
  }
  const auto a = phase_potential(path1, *gauge, tube, charge, opt);
  const auto b = phase_potential(path2, *gauge, tube, charge, opt);
  return PhaseResult::potential(a.phase() - b.phase(), gauge->id(), id,
                                a.error_estimate() + b.error_estimate());
}

}  // namespace abphase
