#include "experiments.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "abphase/dynamics.hpp"
#include "abphase/em_fields.hpp"
#include "abphase/errors.hpp"
#include "abphase/expression.hpp"
#include "abphase/field_interaction.hpp"
#include "abphase/interferometers.hpp"
#include "abphase/phase_engine.hpp"
#include "abphase/sinusoid_fit.hpp"
#include "abphase/trajectory.hpp"
#include "abphase/version.hpp"

namespace abphase::runner {

namespace {

constexpr double kPi = std::numbers::pi;

std::string line(const std::string& key, double v) { return key + " = " + format_number(v); }
std::string line(const std::string& key, const std::string& v) { return key + " = " + v; }

std::vector<double> linspace(double a, double b, long long n) {
  if (n < 2) throw GeometryError("sweep: at least two points are required");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::size_t count(const Config& cfg, const std::string& sec, const std::string& key,
                  long long minimum) {
  const long long v = cfg.integer(sec, key);
  if (v < minimum) {
    throw GeometryError(sec + "." + key + " must be at least " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(v);
}

quad::Tolerance tolerance(const Config& cfg) {
  quad::Tolerance t;
  t.rel = cfg.real("tolerance", "rel");
  t.abs = cfg.real("tolerance", "abs");
  t.accept_rel = cfg.real("tolerance", "accept_rel");
  t.cutoff = cfg.real("tolerance", "cutoff");
  t.max_panels = count(cfg, "tolerance", "max_panels", 1);
  return t;
}

InteractionOptions interaction(const Config& cfg) { return {tolerance(cfg), cfg.units()}; }

PhaseOptions phase_options(const Config& cfg) {
  PhaseOptions opt;
  opt.units = cfg.units();
  opt.interaction = interaction(cfg);
  // Line integrals are cheap; keep them well below the field quadratures.
  opt.tol.rel = std::min(opt.tol.rel, cfg.real("tolerance", "rel"));
  opt.tol.max_panels = opt.interaction.tol.max_panels;
  return opt;
}

FluxTube tube(const Config& cfg) {
  FluxTube t;
  t.flux = cfg.real("tube", "flux");
  t.radius = cfg.real("tube", "radius");
  t.center = {cfg.real("tube", "center_x"), cfg.real("tube", "center_y")};
  return t;
}

GaugeSpec gauge(const Config& cfg, const std::string& sec) {
  GaugeSpec g = cfg.text(sec, "base") == "dirac-string"
                    ? GaugeSpec::dirac_string(cfg.real(sec, "string_angle"))
                    : GaugeSpec::azimuthal();
  const std::string& chi = cfg.text(sec, "chi");
  if (chi != "0") g = gauge_transform(g, Expression::parse(chi));
  return g;
}

std::vector<GaugeSpec> gauges(const Config& cfg, std::vector<GaugeSpec> defaults) {
  const auto names = cfg.instances("gauge");
  if (names.empty()) return defaults;
  std::vector<GaugeSpec> out;
  for (const auto& n : names) out.push_back(gauge(cfg, n));
  return out;
}

void add_fit(RunReport& r, const std::string& prefix, std::span<const double> x,
             std::span<const double> y, std::span<const double> sigma, double expected_omega) {
  const SinusoidFit fit = fit_sinusoid(x, y, sigma);
  r.summary.push_back(line(prefix + ".converged", fit.converged ? "true" : "false"));
  r.summary.push_back(line(prefix + ".omega", fit.omega));
  r.summary.push_back(line(prefix + ".omega_se", fit.omega_se));
  r.summary.push_back(line(prefix + ".period", fit.period()));
  r.summary.push_back(line(prefix + ".period_se", fit.period_se()));
  r.summary.push_back(line(prefix + ".expected_omega", expected_omega));
  r.summary.push_back(line(prefix + ".expected_period", 2.0 * kPi / expected_omega));
  if (!sigma.empty() && fit.omega_se > 0.0) {
    r.summary.push_back(
        line(prefix + ".omega_deviation_in_se", std::abs(fit.omega - expected_omega) / fit.omega_se));
  }
  r.summary.push_back(line(prefix + ".offset", fit.offset));
  r.summary.push_back(line(prefix + ".amplitude", fit.amplitude));
  r.summary.push_back(line(prefix + ".chi2", fit.chi2));
  r.summary.push_back(line(prefix + ".dof", static_cast<double>(fit.dof)));
}

// ---------------------------------------------------------------------------

RunReport loopless_fringe_run(const Config& cfg) {
  RunReport r;
  const FluxTube t = tube(cfg);
  const ChargeState q{cfg.real("charge", "q"), 1.0, {}, {}};
  const auto amp = [&](const char* key, const char* phase) {
    return std::polar(cfg.real("sources", key), phase ? cfg.real("sources", phase) : 0.0);
  };
  const SourceState state{amp("u1", nullptr), amp("v1", "v1_phase"), amp("u2", nullptr),
                          amp("v2", "v2_phase")};
  const LooplessGeometry geo{{cfg.real("sources", "x1"), cfg.real("sources", "y1")},
                             {cfg.real("sources", "x2"), cfg.real("sources", "y2")}};
  const WaveModel wave{cfg.real("wave", "k"), cfg.real("wave", "r_min")};
  ScreenLine screen;
  screen.origin = {cfg.real("screen", "x"), 0.0};
  screen.s_min = cfg.real("screen", "y_min");
  screen.s_max = cfg.real("screen", "y_max");
  screen.points = count(cfg, "screen", "points", 2);
  const PhaseOptions opt = phase_options(cfg);

  const FringeDataset along = loopless_fringe(state, geo, t, q, wave, screen, opt);
  Dataset d1{"screen.csv", "detection probability along the screen line",
             {"y", "probability", "phi_B", "phi_0", "visibility", "dP_dflux"}, {}};
  double max_slope = 0.0;
  for (const auto& p : along.points) {
    d1.rows.push_back({p.abscissa, p.intensity, p.phi_B, p.phi_0, p.visibility, p.dintensity_dflux});
    max_slope = std::max(max_slope, std::abs(p.dintensity_dflux));
  }

  const Point2 sweep_point{cfg.real("screen", "x"), cfg.real("sweep", "y")};
  const auto fluxes = linspace(cfg.real("sweep", "flux_min"), cfg.real("sweep", "flux_max"),
                               cfg.integer("sweep", "points"));
  const FringeDataset sweep = loopless_flux_sweep(state, geo, t, q, wave, sweep_point, fluxes, opt);
  Dataset d2{"flux_sweep.csv", "detection probability versus flux at one screen point",
             {"flux", "probability", "phi_B", "phi_0", "visibility", "dP_dflux"}, {}};
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : sweep.points) {
    d2.rows.push_back({p.abscissa, p.intensity, p.phi_B, p.phi_0, p.visibility, p.dintensity_dflux});
    x.push_back(p.abscissa);
    y.push_back(p.intensity);
    max_slope = std::max(max_slope, std::abs(p.dintensity_dflux));
  }
  r.datasets = {d1, d2};

  const double dtheta =
      two_path_geometry(geo.source1, geo.source2, sweep_point, t.center).delta_theta;
  const double coherence = std::abs(state.u1 * state.v1 * state.u2 * state.v2);
  r.summary.push_back(line("delta_theta", dtheta));
  r.summary.push_back(line("coherence_u1v1u2v2", coherence));
  r.summary.push_back(line("max_abs_dP_dflux", max_slope));
  r.summary.push_back(line("validity_warning", along.validity_warning ? "true" : "false"));
  if (coherence == 0.0) {
    r.summary.push_back(line("fringe", "extinct (u_j v_j = 0 for a source)"));
  } else {
    const double omega = q.charge * dtheta / (2.0 * kPi * cfg.units().hbar * cfg.units().c);
    add_fit(r, "fit", x, y, {}, std::abs(omega));
  }
  return r;
}

RunReport andreev_sweep_run(const Config& cfg) {
  RunReport r;
  JunctionParams p;
  p.rho1 = cfg.real("junction", "rho1");
  p.rho2 = cfg.real("junction", "rho2");
  p.rhoN = cfg.real("junction", "rhoN");
  p.t1 = std::polar(cfg.real("junction", "t1"), cfg.real("junction", "t1_phase"));
  p.t2 = std::polar(cfg.real("junction", "t2"), cfg.real("junction", "t2_phase"));
  p.gap = cfg.real("junction", "gap");
  p.bias = cfg.real("junction", "bias");
  p.tau = cfg.real("junction", "tau");
  p.delta_theta = cfg.real("junction", "delta_theta");
  p.phi0 = cfg.real("junction", "phi0");
  const Units& u = cfg.units();

  ProtocolOptions po;
  po.repetitions = count(cfg, "protocol", "repetitions", 1);
  po.noise_sigma = cfg.real("protocol", "noise");
  po.seed = cfg.seed();
  po.threads = static_cast<unsigned>(count(cfg, "protocol", "threads", 1));

  const auto fluxes = linspace(cfg.real("sweep", "flux_min"), cfg.real("sweep", "flux_max"),
                               cfg.integer("sweep", "points"));
  const FringeDataset ds = measurement_protocol(p, fluxes, po, u);
  Dataset d{"andreev_sweep.csv", "averaged output current versus flux",
            {"flux", "current", "std_error", "phi_B", "phi_0"}, {}};
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
  double i_max = -std::numeric_limits<double>::infinity();
  double i_min = std::numeric_limits<double>::infinity();
  for (const auto& fp : ds.points) {
    d.rows.push_back({fp.abscissa, fp.intensity, fp.std_error, fp.phi_B, fp.phi_0});
    x.push_back(fp.abscissa);
    y.push_back(fp.intensity);
    s.push_back(fp.std_error);
    i_max = std::max(i_max, fp.intensity);
    i_min = std::min(i_min, fp.intensity);
  }
  r.datasets = {d};

  const double g1 = hopping_rate(p.rho1, p.rhoN, p.t1);
  const double g2 = hopping_rate(p.rho2, p.rhoN, p.t2);
  const double omega = u.e * p.delta_theta / (kPi * u.hbar * u.c);
  r.summary.push_back(line("gamma1", g1));
  r.summary.push_back(line("gamma2", g2));
  r.summary.push_back(line("visibility_analytic", visibility(g1, g2)));
  r.summary.push_back(line("visibility_sampled", (i_max - i_min) / (i_max + i_min)));
  r.summary.push_back(line("current_min_sampled", i_min));
  r.summary.push_back(line("current_max_sampled", i_max));
  r.summary.push_back(line("validity_warning", ds.validity_warning ? "true" : "false"));
  if (g1 * g2 > 0.0 && omega != 0.0) {
    const bool noisy = po.noise_sigma > 0.0;
    add_fit(r, "fit", x, y, noisy ? std::span<const double>(s) : std::span<const double>{},
            std::abs(omega));
  }
  return r;
}

RunReport gauge_audit_run(const Config& cfg) {
  RunReport r;
  const FluxTube t = tube(cfg);
  const ChargeState q{cfg.real("charge", "q"), 1.0, {}, {}};
  const PhaseOptions opt = phase_options(cfg);
  const std::vector<GaugeSpec> gs =
      gauges(cfg, {GaugeSpec::azimuthal(), GaugeSpec::dirac_string(kPi),
                   gauge_transform(GaugeSpec::azimuthal(), Expression::parse("0.25*x*y"))});
  PathOptions po;
  po.points = count(cfg, "path", "points", 2);
  const double speed = cfg.real("path", "speed");
  const std::string& kind = cfg.text("path", "kind");

  GaugeAuditReport rep;
  if (kind == "two-path") {
    const auto geo = two_path_geometry(
        {cfg.real("path", "source1_x"), cfg.real("path", "source1_y")},
        {cfg.real("path", "source2_x"), cfg.real("path", "source2_y")},
        {cfg.real("path", "screen_x"), cfg.real("path", "screen_y")}, t.center, speed, po);
    rep = two_path_gauge_audit(geo.path1, geo.path2, gs, t, q, opt);
    r.summary.push_back(line("delta_theta", geo.delta_theta));
  } else {
    const Trajectory path =
        kind == "arc"
            ? arc_path({cfg.real("path", "center_x"), cfg.real("path", "center_y")},
                       cfg.real("path", "radius"), cfg.real("path", "theta_start"),
                       cfg.real("path", "theta_end"), speed, po)
            : straight_path({cfg.real("path", "x0"), cfg.real("path", "y0")},
                            {cfg.real("path", "x1"), cfg.real("path", "y1")}, speed, po);
    rep = gauge_audit(path, gs, t, q, opt);
    r.summary.push_back(line("delta_theta", subtended_angle(path, t.center)));
  }

  Dataset d{"gauge_audit.csv", "potential and local phases per gauge",
            {"gauge", "phase_potential", "error", "phase_local"}, {}};
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    d.rows.push_back({static_cast<double>(i + 1), row.phase, row.error, row.local_phase});
    r.summary.push_back(line("gauge." + std::to_string(i + 1), row.gauge_id));
  }
  r.datasets = {d};
  r.summary.push_back(line("closed", rep.closed ? "true" : "false"));
  r.summary.push_back(line("spread", rep.spread));
  r.summary.push_back(line("local_spread", rep.local_spread));
  r.summary.push_back(line("local_phase", rep.local_phase));
  r.summary.push_back(line("threshold", rep.threshold));
  r.summary.push_back(line("verdict", rep.verdict));
  return r;
}

RunReport lagrangian_identity_run(const Config& cfg) {
  RunReport r;
  const FluxTube t = tube(cfg);
  if (!t.is_static()) throw GeometryError("lagrangian-identity: the tube must be static");
  const double q = cfg.real("charge", "q");
  const InteractionOptions opt = interaction(cfg);
  const std::vector<GaugeSpec> gs =
      gauges(cfg, {GaugeSpec::azimuthal(), GaugeSpec::dirac_string(kPi),
                   gauge_transform(GaugeSpec::azimuthal(),
                                   Expression::parse("0.5/(1+(x-1)*(x-1)+y*y)"))});
  const std::size_t paths = count(cfg, "paths", "count", 1);
  const std::size_t base = count(cfg, "paths", "base_samples", 5);
  const std::size_t levels = count(cfg, "paths", "levels", 2);
  const double duration = cfg.real("paths", "duration");
  const double min_order = cfg.real("paths", "min_order");
  if (!(duration > 0.0)) throw GeometryError("paths.duration must be positive");

  // Trajectories stay on the side of the tube opposite the first Dirac string.
  double away = 0.0;
  for (const auto& g : gs) {
    if (g.has_string()) {
      away = g.string_angle() + kPi;
      break;
    }
  }
  const Vec2 ahead = unit(away);
  const Vec2 side = perp(ahead);
  const double reach = 2.0 + 4.0 * t.radius;

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed()),
                    static_cast<std::uint32_t>(cfg.seed() >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> turn(0.0, 2.0 * kPi);

  Dataset d{"identity_convergence.csv", "max residual per trajectory, gauge and step",
            {"trajectory", "gauge", "samples", "dt", "max_residual", "error_bar", "order", "graded"},
            {}};
  double worst_relative = 0.0;
  double worst_order = std::numeric_limits<double>::infinity();
  std::size_t graded = 0;
  for (std::size_t k = 0; k < paths; ++k) {
    const Point2 r0 = t.center + ahead * (reach + 0.3 * sym(rng)) + side * (0.3 * sym(rng));
    const Vec2 v0 = (ahead * sym(rng) + side * sym(rng)) * (0.3 / duration);
    const Vec2 amp = ahead * (0.1 + 0.1 * sym(rng)) + side * (0.2 + 0.1 * sym(rng));
    const double w = (4.0 + 2.0 * sym(rng)) / duration;
    const double ph = turn(rng);
    const auto pos = [=](double s) { return r0 + v0 * s + amp * std::sin(w * s + ph); };
    const auto vel = [=](double s) { return v0 + amp * (w * std::cos(w * s + ph)); };
    const auto make = [&](std::size_t n) {
      return parametric_path(pos, vel, 0.0, duration, n, false, "random-smooth");
    };
    for (std::size_t g = 0; g < gs.size(); ++g) {
      const IdentityConvergence conv =
          lagrangian_identity_convergence(make, base, levels, gs[g], t, q, opt, min_order);
      for (std::size_t l = 0; l < conv.samples.size(); ++l) {
        d.rows.push_back({static_cast<double>(k + 1), static_cast<double>(g + 1),
                          static_cast<double>(conv.samples[l]), conv.dt[l], conv.max_residual[l],
                          conv.error_bar[l],
                          l == 0 ? std::numeric_limits<double>::quiet_NaN() : conv.order[l - 1],
                          l == 0 ? 0.0 : (conv.graded[l - 1] ? 1.0 : 0.0)});
      }
      worst_relative = std::max(worst_relative, conv.finest_relative);
      for (std::size_t l = 0; l < conv.order.size(); ++l) {
        if (conv.graded[l]) {
          worst_order = std::min(worst_order, conv.order[l]);
          ++graded;
        }
      }
      const std::string tag =
          "trajectory " + std::to_string(k + 1) + ", gauge " + std::to_string(g + 1);
      if (!conv.second_order) r.failures.push_back(tag + ": convergence order below min_order");
      if (!(conv.finest_relative < 1e-4)) {
        r.failures.push_back(tag + ": finest relative residual " + format_number(conv.finest_relative));
      }
    }
  }
  r.datasets = {d};
  for (std::size_t g = 0; g < gs.size(); ++g) {
    r.summary.push_back(line("gauge." + std::to_string(g + 1), gs[g].id()));
  }
  r.summary.push_back(line("worst_finest_relative", worst_relative));
  r.summary.push_back(line("graded_pairs", static_cast<double>(graded)));
  if (graded > 0) r.summary.push_back(line("min_graded_order", worst_order));
  return r;
}

// Relative residuals below this are roundoff, amplified by differencing.
constexpr double kRoundoff = 1e-12;

std::string observed_order(double coarse, double fine) {
  if (coarse <= kRoundoff || fine <= kRoundoff) return "roundoff";
  return format_number(std::log2(coarse / fine));
}

RunReport conservation_suite_run(const Config& cfg) {
  RunReport r;
  FluxTube t = tube(cfg);
  FluxRamp ramp;
  ramp.flux_start = cfg.real("ramp", "flux_start");
  ramp.flux_end = cfg.real("ramp", "flux_end");
  ramp.t_start = cfg.real("ramp", "t_start");
  ramp.duration = cfg.real("ramp", "duration");
  ramp.shape = cfg.text("ramp", "shape") == "linear" ? RampShape::linear : RampShape::smoothstep;
  t.flux = ramp.flux_start;
  t.ramp = ramp;
  const ChargeState q{cfg.real("charge", "q"), 1.0,
                      {cfg.real("charge", "x"), cfg.real("charge", "y")},
                      {cfg.real("charge", "vx"), cfg.real("charge", "vy")}};
  const InteractionOptions opt = interaction(cfg);
  const double t0 = ramp.t_start;
  const double t1 = ramp.t_start + ramp.duration;
  const double limit = 1e-6;

  // Momentum balance at step h and h/2.
  const std::size_t samples = count(cfg, "checks", "samples", 1);
  const double h = cfg.real("checks", "h");
  const ResidualSeries mom = momentum_conservation_check(q, t, t0, t1, samples, h, opt);
  const ResidualSeries mom_half = momentum_conservation_check(q, t, t0, t1, samples, 0.5 * h, opt);
  Dataset dm{"momentum.csv", "|qE| and |dPi/dt| at interior ramp times",
             {"t", "qE", "dPi_dt", "residual"}, {}};
  for (std::size_t i = 0; i < mom.t.size(); ++i) {
    dm.rows.push_back({mom.t[i], mom.lhs[i], mom.rhs[i], mom.residual[i]});
  }
  r.summary.push_back(line("momentum.relative", mom.relative()));
  r.summary.push_back(line("momentum.relative_half_step", mom_half.relative()));
  r.summary.push_back(line("momentum.order", observed_order(mom.relative(), mom_half.relative())));
  if (!(mom.relative() < limit)) r.failures.push_back("momentum balance residual above 1e-6");

  // Faraday circulation mid-ramp.
  PathOptions lo;
  lo.points = count(cfg, "loop", "points", 4);
  const Trajectory loop = arc_path(t.center, cfg.real("loop", "radius"), 0.0, 2.0 * kPi, 1.0, lo);
  const double tm = 0.5 * (t0 + t1);
  const FaradayResult far = faraday_check(t, loop, tm, cfg.units());
  r.summary.push_back(line("faraday.circulation", far.circulation));
  r.summary.push_back(line("faraday.expected", far.expected));
  r.summary.push_back(line("faraday.winding", static_cast<double>(far.winding)));
  r.summary.push_back(line("faraday.relative", far.relative));
  if (!(far.relative < limit)) r.failures.push_back("Faraday circulation residual above 1e-6");

  // Work balance at n and 2n midpoint steps.
  const std::size_t steps = count(cfg, "checks", "steps", 1);
  const WorkBalance wb = work_balance_check(q, t, t0, t1, steps, opt);
  const WorkBalance wb_fine = work_balance_check(q, t, t0, t1, 2 * steps, opt);
  Dataset dw{"work_balance.csv", "work integral against the change of v.Pi",
             {"steps", "work_integral", "momentum_work", "residual", "relative"},
             {{static_cast<double>(steps), wb.work_integral, wb.momentum_work, wb.residual, wb.relative},
              {static_cast<double>(2 * steps), wb_fine.work_integral, wb_fine.momentum_work,
               wb_fine.residual, wb_fine.relative}}};
  r.summary.push_back(line("work.relative", wb.relative));
  r.summary.push_back(line("work.relative_double_steps", wb_fine.relative));
  r.summary.push_back(line("work.order", observed_order(wb.relative, wb_fine.relative)));
  if (!(wb.relative < limit)) r.failures.push_back("work balance residual above 1e-6");

  r.datasets = {dm, dw};
  return r;
}

RunReport trajectory_run(const Config& cfg) {
  RunReport r;
  const FluxTube t = tube(cfg);
  const ChargeState q{cfg.real("charge", "q"), cfg.real("charge", "m"),
                      {cfg.real("charge", "x"), cfg.real("charge", "y")},
                      {cfg.real("charge", "vx"), cfg.real("charge", "vy")}};
  DynamicsConfig dc;
  dc.dt = cfg.real("dynamics", "dt");
  dc.total_time = cfg.real("dynamics", "total_time");
  dc.energy_drift_limit = cfg.real("dynamics", "energy_drift_limit");
  const IntegrationResult res = integrate_trajectory(q, t, dc, cfg.units());

  Dataset d{"trajectory.csv", "integrated trajectory", {"t", "x", "y", "vx", "vy"}, {}};
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& s : res.trajectory.samples()) {
    d.rows.push_back({s.t, s.position.x, s.position.y, s.velocity.x, s.velocity.y});
    closest = std::min(closest, norm(s.position - t.center));
  }
  r.datasets = {d};
  const Vec2 v0 = res.trajectory.front().velocity;
  const Vec2 v1 = res.trajectory.back().velocity;
  r.summary.push_back(line("deflection_rad", std::atan2(cross(v0, v1), dot(v0, v1))));
  r.summary.push_back(line("speed_change_relative", (norm(v1) - norm(v0)) / norm(v0)));
  r.summary.push_back(line("closest_approach", closest));
  r.summary.push_back(line("max_energy_drift", res.max_energy_drift));
  r.summary.push_back(line("subtended_angle", subtended_angle(res.trajectory, t.center)));
  return r;
}

}  // namespace

RunReport run_experiment(const Config& cfg) {
  static const std::map<std::string, std::function<RunReport(const Config&)>> table{
      {"loopless-fringe", loopless_fringe_run},
      {"andreev-sweep", andreev_sweep_run},
      {"gauge-audit", gauge_audit_run},
      {"lagrangian-identity", lagrangian_identity_run},
      {"conservation-suite", conservation_suite_run},
      {"trajectory", trajectory_run},
  };
  const auto it = table.find(cfg.experiment());
  if (it == table.end()) throw Error("unknown experiment " + cfg.experiment());
  RunReport r = it->second(cfg);
  r.experiment = cfg.experiment();
  return r;
}

std::vector<std::filesystem::path> write_report(const RunReport& report, const Config& cfg,
                                                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  const auto open = [&](const std::string& name) {
    const auto path = out_dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    written.push_back(path);
    return f;
  };
  for (const auto& d : report.datasets) {
    auto f = open(d.file);
    for (std::size_t c = 0; c < d.columns.size(); ++c) f << (c ? "," : "") << d.columns[c];
    f << '\n';
    for (const auto& row : d.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << format_number(row[c]);
      f << '\n';
    }
  }
  auto m = open("manifest.txt");
  m << "abphase " << kVersion << '\n';
  m << "experiment " << report.experiment << '\n';
  m << "\n[config]\n";
  for (const auto& l : cfg.resolved()) m << l << '\n';
  m << "\n[datasets]\n";
  for (const auto& d : report.datasets) {
    m << d.file << " rows=" << d.rows.size() << " columns=";
    for (std::size_t c = 0; c < d.columns.size(); ++c) m << (c ? "," : "") << d.columns[c];
    m << "  # " << d.description << '\n';
  }
  m << "\n[summary]\n";
  for (const auto& l : report.summary) m << l << '\n';
  m << "\n[status]\n";
  if (report.failures.empty()) m << "ok\n";
  for (const auto& f : report.failures) m << "FAILED " << f << '\n';
  return written;
}

}  // namespace abphase::runner
