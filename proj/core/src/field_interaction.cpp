#include "abphase/field_interaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abphase/errors.hpp"

namespace abphase {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Overlap integrals of the point-charge Coulomb field with z-independent
// planar fields use charge-centred coordinates: sigma (in-plane distance),
// beta (in-plane direction s) and u with z = sigma tan u. The Jacobian
// cancels the Coulomb singularity and the u integral factors out:
//   int E_q . G d^3r = q * kappa * int dbeta int dsigma s . G(r_q + sigma s).
struct RayFrame {
  Point2 origin;  // charge position
  Vec2 to_center;  // tube center - charge
  double dist = 0.0;
  double beta_center = 0.0;
};

RayFrame make_frame(const ChargeState& charge, const FluxTube& tube) {
  RayFrame f;
  f.origin = charge.position;
  f.to_center = tube.center - charge.position;
  f.dist = norm(f.to_center);
  if (!(f.dist > 0.0)) {
    throw SingularityError("charge coincides with the flux tube center");
  }
  f.beta_center = std::atan2(f.to_center.y, f.to_center.x);
  return f;
}

/// sigma interval where the ray from the charge in direction s is inside the
/// core, clipped to sigma >= lo. Empty pair when it misses.
std::optional<std::pair<double, double>> chord(const RayFrame& f, const Vec2& s, double a,
                                               double lo) {
  if (a <= 0.0) return std::nullopt;
  const double p = dot(s, f.to_center);
  const double disc = p * p - f.dist * f.dist + a * a;
  if (disc <= 0.0) return std::nullopt;
  const double r = std::sqrt(disc);
  const double s1 = std::max(p - r, lo);
  const double s2 = p + r;
  if (!(s2 > s1)) return std::nullopt;
  return std::make_pair(s1, s2);
}

/// Direction breakpoints: straight at the tube center and tangent to the core.
std::vector<double> beta_points(const RayFrame& f, double a) {
  const double b = f.beta_center;
  std::vector<double> pts{b - kPi, b, b + kPi};
  if (a > 0.0 && f.dist > a) {
    const double w = std::asin(a / f.dist);
    pts.push_back(b - w);
    pts.push_back(b + w);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

/// Radial breakpoints along one ray: core chord ends and closest approach.
std::vector<double> sigma_points(const RayFrame& f, const Vec2& s, double a, double lo,
                                 bool to_infinity, double hi = 0.0) {
  std::vector<double> pts{lo};
  if (const auto c = chord(f, s, a, lo)) {
    pts.push_back(c->first);
    pts.push_back(c->second);
  }
  const double p = dot(s, f.to_center);
  if (p > lo) pts.push_back(p);
  pts.push_back(to_infinity ? kInf : hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

void require_acceptable(const quad::Estimate<double>& e, const quad::Tolerance& tol,
                        const char* what) {
  if (!e.acceptable(tol)) {
    throw ToleranceError(std::string(what) + ": quadrature did not reach the acceptance tolerance",
                         e.error);
  }
}

void require_acceptable(const quad::Estimate<Vec2>& e, const quad::Tolerance& tol,
                        const char* what) {
  if (!e.acceptable(tol)) {
    throw ToleranceError(std::string(what) + ": quadrature did not reach the acceptance tolerance",
                         e.error);
  }
}

/// q kappa int dbeta int dsigma s . G for a planar vector field G.
template <class Field>
quad::Estimate<double> coulomb_overlap(const RayFrame& frame, double a, Field&& G,
                                       const quad::Tolerance& tol) {
  const double lo = tol.cutoff;
  const auto inner_tol = tol.inner();
  auto inner = [&](double beta) {
    const Vec2 s = unit(beta);
    const auto pts = sigma_points(frame, s, a, lo, true);
    return quad::integrate([&](double sigma) { return dot(s, G(frame.origin + s * sigma)); },
                           std::span<const double>(pts), inner_tol);
  };
  const auto pts = beta_points(frame, a);
  return quad::integrate(inner, std::span<const double>(pts), tol);
}

}  // namespace

namespace detail {

double axial_factor() {
  static const double kappa = [] {
    quad::Tolerance tol;
    tol.rel = 1e-14;
    return quad::integrate([](double u) { return std::cos(u); }, -kPi / 2, kPi / 2, tol).value;
  }();
  return kappa;
}

}  // namespace detail

bool ChargeState::relativistic(const Units& units) const {
  return norm(velocity) / units.c >= 0.1;
}

quad::Estimate<Vec2> field_momentum(const ChargeState& charge, const FluxTube& tube,
                                    const InteractionOptions& opt) {
  const RayFrame frame = make_frame(charge, tube);
  const double c = opt.units.c;
  quad::Estimate<Vec2> out;
  if (tube.radius <= 0.0) {
    const Vec2 d = charge.position - tube.center;
    const double rho = frame.dist;
    out.value = perp(d) / rho * (charge.charge * tube.flux / (2.0 * kPi * c * rho));
    out.evaluations = 1;
    return out;
  }
  if (charge.charge == 0.0 || tube.flux == 0.0) return out;

  const double a = tube.radius;
  const double B0 = tube.flux / (kPi * a * a);
  const double lo = opt.tol.cutoff;
  const auto inner_tol = opt.tol.inner();
  // E_q x B z-hat has in-plane part -perp(s) B along the ray.
  auto inner = [&](double beta) {
    const Vec2 s = unit(beta);
    const auto ch = chord(frame, s, a, lo);
    if (!ch) return quad::Estimate<Vec2>{};
    const std::array<double, 2> pts{ch->first, ch->second};
    return quad::integrate(
        [&](double sigma) { return -perp(s) * magnetic_field(tube, frame.origin + s * sigma); },
        std::span<const double>(pts), inner_tol);
  };
  const auto pts = beta_points(frame, a);
  auto est = quad::integrate(inner, std::span<const double>(pts), opt.tol);

  const double pref = charge.charge * detail::axial_factor() / (4.0 * kPi * c);
  out.value = est.value * pref;
  out.error = est.error * std::abs(pref);
  out.l1 = est.l1 * std::abs(pref);
  // Excluded ball around the charge: |integrand| <= B0 over an angle 2 pi.
  if (norm(charge.position - tube.center) < a) out.error += std::abs(pref) * 2 * kPi * lo * B0;
  out.evaluations = est.evaluations;
  out.converged = est.converged;
  require_acceptable(out, opt.tol, "field_momentum");
  return out;
}

quad::Estimate<double> interaction_energy(const ChargeState& charge, const FluxTube& tube,
                                          double t, const InteractionOptions& opt) {
  quad::Estimate<double> out;
  if (tube.flux_rate_at(t) == 0.0 || charge.charge == 0.0) return out;
  const RayFrame frame = make_frame(charge, tube);
  auto E = [&](const Point2& p) { return induced_electric_field(tube, p, t, opt.units); };
  auto est = coulomb_overlap(frame, tube.radius, E, opt.tol);
  const double pref = charge.charge * detail::axial_factor() / (4.0 * kPi);
  out.value = est.value * pref;
  out.error = est.error * std::abs(pref) +
              std::abs(pref) * 2 * kPi * opt.tol.cutoff * norm(E(charge.position));
  out.l1 = est.l1 * std::abs(pref);
  out.evaluations = est.evaluations;
  out.converged = est.converged;
  require_acceptable(out, opt.tol, "interaction_energy");
  return out;
}

quad::Estimate<double> work_to_establish_B(const ChargeState& charge, const FluxTube& tube,
                                           const InteractionOptions& opt) {
  const auto pi = field_momentum(charge, tube, opt);
  quad::Estimate<double> out;
  out.value = dot(charge.velocity, pi.value);
  out.error = norm(charge.velocity) * pi.error;
  out.l1 = norm(charge.velocity) * pi.l1;
  out.evaluations = pi.evaluations;
  out.converged = pi.converged;
  return out;
}

quad::Estimate<double> lagrangian_local(const ChargeState& charge, const FluxTube& tube, double t,
                                        const InteractionOptions& opt) {
  auto out = work_to_establish_B(charge, tube.at(t), opt);
  const auto u = interaction_energy(charge, tube, t, opt);
  out.value -= u.value;
  out.error += u.error;
  out.l1 += u.l1;
  out.evaluations += u.evaluations;
  out.converged = out.converged && u.converged;
  return out;
}

double lagrangian_potential(const ChargeState& charge, const GaugeSpec& gauge,
                            const FluxTube& tube, const Units& units) {
  if (charge.velocity == Vec2{}) return 0.0;
  return charge.charge / units.c * dot(charge.velocity, vector_potential(gauge, tube, charge.position));
}

quad::Estimate<double> boundary_term(const ChargeState& charge, const GaugeSpec& gauge,
                                     const FluxTube& tube, const InteractionOptions& opt) {
  quad::Estimate<double> out;
  if (charge.charge == 0.0) return out;
  const RayFrame frame = make_frame(charge, tube);
  const double a = tube.radius;
  auto A = [&](const Point2& p) { return vector_potential_regular(gauge, tube, p); };

  // Absolute convergence at infinity: the angular L1 norm of the integrand,
  // h(sigma) = int |s . A| dbeta, must fall off faster than 1/sigma.
  {
    const double R = 1e3 * std::max({1.0, frame.dist, a, norm(charge.position), norm(tube.center)});
    quad::Tolerance ht;
    ht.rel = 1e-6;
    auto h = [&](double sigma) {
      return quad::integrate(
                 [&](double beta) {
                   const Vec2 s = unit(beta);
                   return std::abs(dot(s, A(frame.origin + s * sigma)));
                 },
                 {frame.beta_center - kPi, frame.beta_center + kPi}, ht)
          .value;
    };
    if (!gauge.chi.empty()) {
      // A winding chi (nonzero circulation far out) adds a flux line at its
      // singular point; its volume overlap alone is not the gauge partner of
      // (q/c) v . grad chi.
      const auto circ = quad::integrate(
          [&](double beta) {
            const Vec2 s = unit(beta);
            return dot(perp(s), gauge.chi_gradient(frame.origin + s * R)) * R;
          },
          {0.0, 2.0 * kPi}, ht);
      if (std::abs(circ.value) > 1e-6 * std::max(1.0, circ.l1)) {
        throw GeometryError(
            "boundary_term: gauge function is multivalued (winds around a singular point); "
            "represent it as a Dirac-string gauge instead");
      }
    }
    const double h1 = h(R);
    const double h4 = h(4.0 * R);
    if (h1 > 0.0) {
      const double exponent = h4 > 0.0 ? std::log(h1 / h4) / std::log(4.0) : kInf;
      if (exponent < 1.2) {
        throw DivergentTailError(
            "boundary_term: integrand tail decays too slowly (gauge function unbounded at "
            "infinity)",
            R * h1);
      }
    }
  }

  auto est = coulomb_overlap(frame, a, A, opt.tol);
  const double pref = charge.charge * detail::axial_factor() / (4.0 * kPi * opt.units.c);
  out.value = est.value * pref;
  out.error = est.error * std::abs(pref) +
              std::abs(pref) * 2 * kPi * opt.tol.cutoff * norm(A(charge.position));
  out.l1 = est.l1 * std::abs(pref);
  out.evaluations = est.evaluations;
  out.converged = est.converged;

  if (gauge.has_string() && tube.flux != 0.0) {
    // The string carries A = Phi delta(n . (r - c)) n on the half plane
    // behind it; after the axial integral this leaves a line integral.
    const Vec2 u = unit(gauge.string_angle());
    const Vec2 n = perp(u);
    const double h = dot(frame.to_center, n);
    const double p = dot(frame.to_center, u);
    if (h == 0.0 && p < 0.0) throw SingularityError("boundary_term: charge lies on the Dirac string");
    if (h != 0.0) {
      std::vector<double> pts{0.0};
      if (-p > 0.0) pts.push_back(-p);
      pts.push_back(kInf);
      auto sheet = quad::integrate(
          [&](double lambda) {
            const double w = lambda + p;
            return h / (h * h + w * w);
          },
          std::span<const double>(pts), opt.tol);
      const double sp = pref * tube.flux;
      out.value += sheet.value * sp;
      out.error += sheet.error * std::abs(sp);
      out.l1 += sheet.l1 * std::abs(sp);
      out.evaluations += sheet.evaluations;
      out.converged = out.converged && sheet.converged;
    }
  }
  require_acceptable(out, opt.tol, "boundary_term");
  return out;
}

InteractionBreakdown interaction_breakdown(const ChargeState& charge, const GaugeSpec& gauge,
                                           const FluxTube& tube, double t,
                                           const InteractionOptions& opt) {
  InteractionBreakdown b;
  const FluxTube now = tube.at(t);
  b.field_momentum = field_momentum(charge, now, opt).value;
  b.interaction_energy = interaction_energy(charge, tube, t, opt).value;
  b.lagrangian_local = dot(charge.velocity, b.field_momentum) - b.interaction_energy;
  b.lagrangian_potential = lagrangian_potential(charge, gauge, now, opt.units);
  const auto F = boundary_term(charge, gauge, now, opt);
  b.boundary_term = F.value;
  b.boundary_term_error = F.error;
  b.gauge_used = gauge.id();
  b.relativistic_warning = charge.relativistic(opt.units);
  return b;
}

double field_angular_momentum(double q, double flux, const Units& units) {
  return q * flux / (2.0 * kPi * units.c);
}

IdentityResidual verify_lagrangian_relation(const Trajectory& traj, const GaugeSpec& gauge,
                                            const FluxTube& tube, double charge,
                                            const InteractionOptions& opt) {
  if (!tube.is_static()) {
    throw GeometryError("verify_lagrangian_relation: requires a static flux tube");
  }
  const auto& s = traj.samples();
  const std::size_t n = s.size();
  if (n < 3) throw GeometryError("verify_lagrangian_relation: need at least 3 samples");
  if (const auto* g = std::get_if<DiracStringGauge>(&gauge.base)) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (string_crossing_sign(*g, tube, s[i].position, s[i + 1].position) != 0) {
        throw SingularityError(
            "verify_lagrangian_relation: trajectory crosses the Dirac string, where L is a delta");
      }
    }
  }

  IdentityResidual r;
  r.t.resize(n);
  r.lagrangian_local.resize(n);
  r.lagrangian_potential.resize(n);
  r.boundary_term.resize(n);
  r.dF_dt.resize(n);
  r.residual.resize(n);
  r.error_bar.resize(n);
  std::vector<double> F_err(n);

  for (std::size_t i = 0; i < n; ++i) {
    const ChargeState cs{charge, 1.0, s[i].position, s[i].velocity};
    r.t[i] = s[i].t;
    r.lagrangian_local[i] = lagrangian_local(cs, tube, s[i].t, opt).value;
    r.lagrangian_potential[i] = lagrangian_potential(cs, gauge, tube, opt.units);
    const auto F = boundary_term(cs, gauge, tube, opt);
    r.boundary_term[i] = F.value;
    F_err[i] = F.error;
  }

  // Three-point derivative weights on a possibly non-uniform grid.
  auto apply = [&](std::size_t i, std::size_t j0, std::array<double, 3> w) {
    double d = 0.0;
    double e = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      d += w[k] * r.boundary_term[j0 + k];
      e += std::abs(w[k]) * F_err[j0 + k];
    }
    r.dF_dt[i] = d;
    r.error_bar[i] = e;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      const double h1 = r.t[1] - r.t[0];
      const double h2 = r.t[2] - r.t[1];
      apply(i, 0,
            {-(2 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))});
    } else if (i + 1 == n) {
      const double h1 = r.t[n - 2] - r.t[n - 3];
      const double h2 = r.t[n - 1] - r.t[n - 2];
      apply(i, n - 3,
            {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2), (2 * h2 + h1) / (h2 * (h1 + h2))});
    } else {
      const double h1 = r.t[i] - r.t[i - 1];
      const double h2 = r.t[i + 1] - r.t[i];
      apply(i, i - 1,
            {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))});
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    r.residual[i] =
        std::abs(r.lagrangian_local[i] - r.lagrangian_potential[i] - r.dF_dt[i]);
    r.max_residual = std::max(r.max_residual, r.residual[i]);
    r.max_error_bar = std::max(r.max_error_bar, r.error_bar[i]);
    r.scale = std::max({r.scale, std::abs(r.lagrangian_local[i]),
                        std::abs(r.lagrangian_potential[i]), std::abs(r.dF_dt[i])});
  }
  return r;
}

IdentityConvergence lagrangian_identity_convergence(
    const std::function<Trajectory(std::size_t)>& make, std::size_t base_samples,
    std::size_t levels, const GaugeSpec& gauge, const FluxTube& tube, double charge,
    const InteractionOptions& opt, double min_order) {
  if (base_samples < 3 || levels < 2) {
    throw GeometryError("lagrangian_identity_convergence: need >= 3 samples and >= 2 levels");
  }
  IdentityConvergence c;
  std::size_t n = base_samples;
  for (std::size_t k = 0; k < levels; ++k) {
    const Trajectory traj = make(n);
    const auto r = verify_lagrangian_relation(traj, gauge, tube, charge, opt);
    c.samples.push_back(n);
    c.dt.push_back(traj.duration() / static_cast<double>(n - 1));
    c.max_residual.push_back(r.max_residual);
    c.error_bar.push_back(r.max_error_bar);
    c.scale = std::max(c.scale, r.scale);
    n = 2 * n - 1;
  }
  c.second_order = true;
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    const double a = c.max_residual[k];
    const double b = c.max_residual[k + 1];
    const double ord = (a > 0.0 && b > 0.0) ? std::log2(a / b) : kInf;
    c.order.push_back(ord);
    // Below the quadrature error bar the residual no longer carries
    // truncation error; only pairs above it are graded.
    const bool above_floor = b > c.error_bar[k + 1];
    c.graded.push_back(above_floor);
    if (above_floor && ord < min_order) c.second_order = false;
  }
  c.finest_relative = c.scale > 0.0 ? c.max_residual.back() / c.scale : c.max_residual.back();
  return c;
}

}  // namespace abphase
