#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abphase/expression.hpp"
#include "abphase/units.hpp"
#include "abphase/vec.hpp"

namespace abphase {

enum class RampShape { linear, smoothstep };

/// Flux history Phi(t) running from flux_start to flux_end over
/// [t_start, t_start + duration]; constant outside that window.
struct FluxRamp {
  double flux_start = 0.0;
  double flux_end = 0.0;
  double t_start = 0.0;
  double duration = 1.0;
  RampShape shape = RampShape::smoothstep;

  double flux(double t) const;
  double rate(double t) const;
};

/// Infinitely long solenoid along z with a uniform core of radius `radius`;
/// radius 0 is the ideal line flux. Without a ramp the flux is
/// flux + flux_rate * t.
struct FluxTube {
  double flux = 0.0;
  double radius = 0.0;
  Point2 center{};
  double flux_rate = 0.0;
  std::optional<FluxRamp> ramp;

  double flux_at(double t) const;
  double flux_rate_at(double t) const;
  bool is_static() const { return !ramp && flux_rate == 0.0; }
  /// The tube frozen at time t (ramp removed, flux and rate set).
  FluxTube at(double t) const;
};

struct AzimuthalGauge {};

/// Azimuthal gauge plus chi_s = -Phi * theta_rel / (2 pi), theta_rel in
/// [0, 2 pi) measured from `string_angle`. The potential vanishes outside the
/// core; all flux is carried by the string, the ray from the tube center in
/// direction string_angle.
struct DiracStringGauge {
  double string_angle = 0.0;
};

struct GaugeSpec {
  std::variant<AzimuthalGauge, DiracStringGauge> base;
  std::vector<Expression> chi;  // summed

  static GaugeSpec azimuthal() { return {AzimuthalGauge{}, {}}; }
  static GaugeSpec dirac_string(double string_angle) {
    return {DiracStringGauge{string_angle}, {}};
  }

  bool has_string() const { return std::holds_alternative<DiracStringGauge>(base); }
  double string_angle() const;
  double chi_value(const Point2& p) const;
  Vec2 chi_gradient(const Point2& p) const;
  /// Stable identifier, e.g. "azimuthal+chi[3*x]".
  std::string id() const;
};

/// B_z of the tube. Zero for radius 0 (the line distribution is handled
/// analytically by the callers that need it).
double magnetic_field(const FluxTube& tube, const Point2& p);

/// Throws SingularityError at the tube center and on the Dirac string.
Vec2 vector_potential(const GaugeSpec& gauge, const FluxTube& tube, const Point2& p);

/// Same as vector_potential but without the string check; on the string it
/// returns the one-sided regular part (the delta-function string flux is
/// omitted). Throws only at the tube center.
Vec2 vector_potential_regular(const GaugeSpec& gauge, const FluxTube& tube, const Point2& p);

/// Induced E = -(1/c) dA/dt in the azimuthal gauge, using the flux rate at t.
Vec2 induced_electric_field(const FluxTube& tube, const Point2& p, double t,
                            const Units& units = {});

GaugeSpec gauge_transform(const GaugeSpec& gauge, const Expression& chi);

/// |curl A - B_z| by second-order central differences with step h.
double curl_residual(const GaugeSpec& gauge, const FluxTube& tube, const Point2& p, double h);

/// Flux of B through the disk of radius r about `center` (quadrature for a
/// finite core, exact for the line flux).
double flux_through_circle(const FluxTube& tube, const Point2& center, double r,
                           double rel_tol = 1e-11);

/// Signed number of times segment p0->p1 crosses the Dirac string: +1 when
/// crossing in the direction z-hat x string direction, -1 against it, 0 when
/// it misses. Throws SingularityError if the segment passes through the
/// tube center or lies along the string.
int string_crossing_sign(const DiracStringGauge& g, const FluxTube& tube, const Point2& p0,
                         const Point2& p1);

}  // namespace abphase
