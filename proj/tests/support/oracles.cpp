#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace abphase::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
using Rule = boost::math::quadrature::gauss<double, 20>;

// Composite Gauss-Legendre over consecutive breakpoints; f(x, w) receives
// each node with its weight.
template <class F>
void for_nodes(const std::vector<double>& pts, F&& f) {
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    const double a = pts[p];
    const double b = pts[p + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
      f(mid + half * x[i], half * w[i]);
      if (x[i] != 0.0) f(mid - half * x[i], half * w[i]);
    }
  }
}

std::vector<double> uniform(double a, double b, int panels) {
  std::vector<double> out;
  for (int i = 0; i <= panels; ++i) out.push_back(a + (b - a) * i / panels);
  return out;
}

// Breakpoints on [a, b] refined geometrically toward each point in `toward`.
std::vector<double> graded(double a, double b, const std::vector<double>& toward, int levels) {
  std::vector<double> pts{a, b};
  for (double s : toward) {
    if (s < a || s > b) continue;
    pts.push_back(s);
    for (int k = 1; k <= levels; ++k) {
      const double f = std::ldexp(1.0, -k);
      if (s > a) pts.push_back(s - (s - a) * f);
      if (s < b) pts.push_back(s + (b - s) * f);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double lens_area(double r1, double r2, double d) {
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) return kPi * std::pow(std::min(r1, r2), 2);
  const double a1 = std::acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1));
  const double a2 = std::acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2));
  const double k = std::sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2));
  return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k;
}

double flux_through_circle(const FluxTube& tube, const Point2& center, double r) {
  const double d = norm(tube.center - center);
  if (tube.radius == 0.0) return d < r ? tube.flux : 0.0;
  return tube.flux / (kPi * tube.radius * tube.radius) * lens_area(tube.radius, r, d);
}

Vec2 field_momentum_cylindrical(double q, const FluxTube& tube, const Point2& charge,
                                const Units& units) {
  const double a = tube.radius;
  const double B = tube.flux / (kPi * a * a);
  Vec2 sum{};
  for_nodes(uniform(0.0, a, 2), [&](double rho, double wr) {
    for_nodes(uniform(0.0, 2.0 * kPi, 4), [&](double th, double wt) {
      const Point2 p = tube.center + unit(th) * rho;
      const Vec2 d = p - charge;
      for_nodes(uniform(-0.5 * kPi, 0.5 * kPi, 4), [&](double u, double wu) {
        const double z = std::tan(u);
        const double jac = 1.0 / (std::cos(u) * std::cos(u));
        const double r3 = std::pow(dot(d, d) + z * z, 1.5);
        const Vec2 E = d * (q / r3);
        sum += Vec2{E.y, -E.x} * (B * rho * jac * wr * wt * wu);
      });
    });
  });
  return sum * (1.0 / (4.0 * kPi * units.c));
}

Value coulomb_overlap_polar(double q, const Point2& charge, const Point2& origin,
                            const std::function<Vec2(const Point2&)>& G, double r_inner,
                            double r_max, double c) {
  const Vec2 rel = charge - origin;
  const double rho_q = norm(rel);
  const double th_q = std::atan2(rel.y, rel.x);
  const auto rho_pts = graded(r_inner, r_max, {r_inner, rho_q}, 40);
  const auto th_pts = graded(th_q - kPi, th_q + kPi, {th_q}, 40);
  Value out;
  for_nodes(rho_pts, [&](double rho, double wr) {
    for_nodes(th_pts, [&](double th, double wt) {
      const Point2 p = origin + unit(th) * rho;
      const Vec2 d = p - charge;
      const double dd = dot(d, d);
      if (dd == 0.0) return;
      // Axial integral of the Coulomb field: 2 q d / |d|^2.
      const double f = dot(d * (2.0 * q / dd), G(p)) * rho * wr * wt;
      out.value += f;
      out.l1 += std::abs(f);
    });
  });
  out.value /= 4.0 * kPi * c;
  out.l1 /= 4.0 * kPi * c;
  return out;
}

double string_boundary_term_line(double q, double flux, const Point2& center, double string_angle,
                                 const Point2& charge, double c) {
  const Vec2 rel = charge - center;
  double th = std::atan2(rel.y, rel.x) - string_angle;
  th = std::fmod(th, 2.0 * kPi);
  if (th < 0.0) th += 2.0 * kPi;
  return q * flux / (2.0 * kPi * c) * (th - kPi);
}

double finite_difference_curl(const std::function<Vec2(const Point2&)>& A, const Point2& p,
                              double h) {
  const double dAy_dx = (A(p + Vec2{h, 0.0}).y - A(p - Vec2{h, 0.0}).y) / (2.0 * h);
  const double dAx_dy = (A(p + Vec2{0.0, h}).x - A(p - Vec2{0.0, h}).x) / (2.0 * h);
  return dAy_dx - dAx_dy;
}

}  // namespace abphase::oracle
