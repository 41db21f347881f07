#include "abphase/em_fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "abphase/errors.hpp"
#include "abphase/quadrature.hpp"

namespace abphase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Relative distance below which a point counts as lying on a singular set.
constexpr double kOnSet = 1e-12;

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
double smoothstep_slope(double s) { return 6.0 * s * (1.0 - s); }

void require_off_center(const FluxTube& tube, const Point2& p, const char* what) {
  const double rho = norm(p - tube.center);
  if (!(rho > kOnSet * std::max(1.0, norm(tube.center)))) {
    throw SingularityError(std::string(what) + ": point coincides with the flux tube center");
  }
}

/// Azimuthal-gauge A, without the chi terms.
Vec2 azimuthal_potential(const FluxTube& tube, const Vec2& d, double rho) {
  const Vec2 theta_hat = perp(d) / rho;
  const double a = tube.radius;
  const double mag = rho >= a ? tube.flux / (kTwoPi * rho) : tube.flux * rho / (kTwoPi * a * a);
  return theta_hat * mag;
}

}  // namespace

double FluxRamp::flux(double t) const {
  if (t <= t_start) return flux_start;
  if (t >= t_start + duration) return flux_end;
  const double s = (t - t_start) / duration;
  const double w = shape == RampShape::linear ? s : smoothstep(s);
  return flux_start + (flux_end - flux_start) * w;
}

double FluxRamp::rate(double t) const {
  if (t < t_start || t > t_start + duration) return 0.0;
  const double s = (t - t_start) / duration;
  const double dw = shape == RampShape::linear ? 1.0 : smoothstep_slope(s);
  return (flux_end - flux_start) * dw / duration;
}

double FluxTube::flux_at(double t) const { return ramp ? ramp->flux(t) : flux + flux_rate * t; }

double FluxTube::flux_rate_at(double t) const { return ramp ? ramp->rate(t) : flux_rate; }

FluxTube FluxTube::at(double t) const {
  FluxTube frozen = *this;
  frozen.flux = flux_at(t);
  frozen.flux_rate = flux_rate_at(t);
  frozen.ramp.reset();
  return frozen;
}

double GaugeSpec::string_angle() const {
  if (const auto* s = std::get_if<DiracStringGauge>(&base)) return s->string_angle;
  return 0.0;
}

double GaugeSpec::chi_value(const Point2& p) const {
  double v = 0.0;
  for (const auto& e : chi) v += e.value(p);
  return v;
}

Vec2 GaugeSpec::chi_gradient(const Point2& p) const {
  Vec2 g{};
  for (const auto& e : chi) g += e.gradient(p);
  return g;
}

std::string GaugeSpec::id() const {
  std::string out = has_string() ? "dirac-string(" + std::to_string(string_angle()) + ")"
                                 : std::string("azimuthal");
  for (const auto& e : chi) out += "+chi[" + e.text() + "]";
  return out;
}

double magnetic_field(const FluxTube& tube, const Point2& p) {
  const double a = tube.radius;
  if (a <= 0.0) return 0.0;
  const double rho = norm(p - tube.center);
  return rho < a ? tube.flux / (std::numbers::pi * a * a) : 0.0;
}

Vec2 vector_potential_regular(const GaugeSpec& gauge, const FluxTube& tube, const Point2& p) {
  require_off_center(tube, p, "vector_potential");
  const Vec2 d = p - tube.center;
  const double rho = norm(d);
  Vec2 A = azimuthal_potential(tube, d, rho);
  if (gauge.has_string()) {
    // grad(-Phi theta / 2 pi) = -Phi/(2 pi rho) theta-hat. Outside the core
    // it cancels the azimuthal term exactly.
    if (rho >= tube.radius) {
      A = Vec2{};
    } else {
      A -= perp(d) / rho * (tube.flux / (kTwoPi * rho));
    }
  }
  if (!gauge.chi.empty()) A += gauge.chi_gradient(p);
  return A;
}

Vec2 vector_potential(const GaugeSpec& gauge, const FluxTube& tube, const Point2& p) {
  if (gauge.has_string()) {
    require_off_center(tube, p, "vector_potential");
    const Vec2 u = unit(gauge.string_angle());
    const Vec2 d = p - tube.center;
    const double rho = norm(d);
    if (dot(u, d) > 0.0 && std::abs(cross(u, d)) <= kOnSet * std::max(1.0, rho)) {
      throw SingularityError("vector_potential: point lies on the Dirac string");
    }
  }
  return vector_potential_regular(gauge, tube, p);
}

Vec2 induced_electric_field(const FluxTube& tube, const Point2& p, double t, const Units& units) {
  require_off_center(tube, p, "induced_electric_field");
  const double rate = tube.flux_rate_at(t);
  if (rate == 0.0) return Vec2{};
  const Vec2 d = p - tube.center;
  const double rho = norm(d);
  const double a = tube.radius;
  const double mag = rho >= a ? -rate / (kTwoPi * units.c * rho)
                              : -rate * rho / (kTwoPi * units.c * a * a);
  return perp(d) / rho * mag;
}

GaugeSpec gauge_transform(const GaugeSpec& gauge, const Expression& chi) {
  GaugeSpec out = gauge;
  out.chi.push_back(chi);
  return out;
}

double curl_residual(const GaugeSpec& gauge, const FluxTube& tube, const Point2& p, double h) {
  const Vec2 ex{h, 0.0};
  const Vec2 ey{0.0, h};
  const double dAy_dx =
      (vector_potential(gauge, tube, p + ex).y - vector_potential(gauge, tube, p - ex).y) / (2 * h);
  const double dAx_dy =
      (vector_potential(gauge, tube, p + ey).x - vector_potential(gauge, tube, p - ey).x) / (2 * h);
  return std::abs(dAy_dx - dAx_dy - magnetic_field(tube, p));
}

double flux_through_circle(const FluxTube& tube, const Point2& center, double r, double rel_tol) {
  const Vec2 D = tube.center - center;
  const double dist = norm(D);
  if (tube.radius <= 0.0) {
    if (std::abs(dist - r) <= kOnSet * std::max(1.0, r)) {
      throw SingularityError("flux_through_circle: circle passes through the line flux");
    }
    return dist < r ? tube.flux : 0.0;
  }
  const double a = tube.radius;
  const double thetaD = std::atan2(D.y, D.x);
  quad::Tolerance tol;
  tol.rel = rel_tol;

  auto ring = [&](double rho) {
    // B is piecewise constant on the ring; split at the core-boundary
    // intersections.
    std::vector<double> pts{thetaD - std::numbers::pi, thetaD + std::numbers::pi};
    if (rho > 0.0 && dist > 0.0) {
      const double c = (rho * rho + dist * dist - a * a) / (2.0 * rho * dist);
      if (std::abs(c) < 1.0) {
        const double w = std::acos(c);
        pts = {thetaD - std::numbers::pi, thetaD - w, thetaD + w, thetaD + std::numbers::pi};
      }
    }
    auto est = quad::integrate(
        [&](double th) { return magnetic_field(tube, center + unit(th) * rho) * rho; },
        std::span<const double>(pts), tol.inner());
    return est;
  };

  std::vector<double> radial{0.0};
  for (double b : {dist - a, dist + a}) {
    if (b > 0.0 && b < r) radial.push_back(b);
  }
  radial.push_back(r);
  std::sort(radial.begin(), radial.end());
  const auto est = quad::integrate(ring, std::span<const double>(radial), tol);
  return est.value;
}

int string_crossing_sign(const DiracStringGauge& g, const FluxTube& tube, const Point2& p0,
                         const Point2& p1) {
  const Vec2 u = unit(g.string_angle);
  const Vec2 d0 = p0 - tube.center;
  const Vec2 d1 = p1 - tube.center;
  const double s0 = cross(u, d0);
  const double s1 = cross(u, d1);
  // Half-open convention: s >= 0 is the positive side, so a path that
  // touches the string at a sample point is counted once.
  const bool neg0 = s0 < 0.0;
  const bool neg1 = s1 < 0.0;
  if (s0 == 0.0 && s1 == 0.0) {
    if (std::max(dot(u, d0), dot(u, d1)) > 0.0) {
      throw SingularityError("path runs along the Dirac string");
    }
    return 0;
  }
  if (neg0 == neg1) return 0;
  const double t = s0 / (s0 - s1);
  const Vec2 hit = d0 + (d1 - d0) * t;
  const double along = dot(u, hit);
  if (along == 0.0) throw SingularityError("path passes through the flux tube center");
  if (along < 0.0) return 0;
  return neg0 ? +1 : -1;
}

}  // namespace abphase
