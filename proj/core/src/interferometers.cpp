#include "abphase/interferometers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "abphase/errors.hpp"
#include "abphase/trajectory.hpp"

namespace abphase {

namespace {

constexpr double kPi = std::numbers::pi;

struct FringeTerms {
  cplx a;  // u2 v1 phi1
  cplx b;  // u1 v2 phi2
};

FringeTerms fringe_terms(const SourceState& s, const LooplessGeometry& g, const WaveModel& w,
                         const Point2& x) {
  return {s.u2 * s.v1 * wave_amplitude(g.source1, x, w),
          s.u1 * s.v2 * wave_amplitude(g.source2, x, w)};
}

FringePoint fringe_point(const FringeTerms& t, double phi_B, double dphiB_dflux) {
  FringePoint fp;
  const double A = std::abs(t.a);
  const double B = std::abs(t.b);
  fp.phi_B = phi_B;
  fp.phi_0 = (A > 0.0 && B > 0.0) ? std::arg(t.a) - std::arg(t.b) : 0.0;
  const double phi = phi_B + fp.phi_0;
  fp.intensity = A * A + B * B + 2.0 * A * B * std::cos(phi);
  fp.visibility = (A * A + B * B) > 0.0 ? 2.0 * A * B / (A * A + B * B) : 0.0;
  fp.dintensity_dflux = -2.0 * A * B * std::sin(phi) * dphiB_dflux;
  return fp;
}

/// Local-theory phase difference of the two rays and its flux derivative.
std::pair<double, double> ray_phase(const LooplessGeometry& g, const FluxTube& tube,
                                    const ChargeState& charge, const Point2& x,
                                    const PhaseOptions& opt) {
  const auto geo = two_path_geometry(g.source1, g.source2, x, tube.center);
  const double phi = two_path_phase_difference(geo.path1, geo.path2, tube, charge,
                                               Theory::local_field, std::nullopt, opt)
                         .phase();
  FluxTube unit_tube = tube;
  unit_tube.flux = 1.0;
  const double slope = two_path_phase_difference(geo.path1, geo.path2, unit_tube, charge,
                                                 Theory::local_field, std::nullopt, opt)
                           .phase();
  return {phi, slope};
}

}  // namespace

bool SourceState::normalized(double tol) const {
  return std::abs(std::norm(u1) + std::norm(v1) - 1.0) <= tol &&
         std::abs(std::norm(u2) + std::norm(v2) - 1.0) <= tol;
}

SourceState SourceState::balanced() {
  const double r = 1.0 / std::sqrt(2.0);
  return {r, r, r, r};
}

cplx wave_amplitude(const Point2& source, const Point2& screen, const WaveModel& wave) {
  const double r = norm(screen - source);
  if (!(r > 0.0)) throw GeometryError("wave_amplitude: screen point coincides with the source");
  return std::polar(1.0 / std::max(r, wave.r_min), wave.k * r);
}

double ScreenLine::abscissa(std::size_t i) const {
  if (points < 2) return s_min;
  if (i + 1 == points) return s_max;
  return s_min + (s_max - s_min) * static_cast<double>(i) / static_cast<double>(points - 1);
}

FringeDataset loopless_fringe(const SourceState& state, const LooplessGeometry& geometry,
                              const FluxTube& tube, const ChargeState& charge,
                              const WaveModel& wave, const ScreenLine& screen,
                              const PhaseOptions& opt) {
  if (!state.normalized(1e-9)) throw GeometryError("loopless_fringe: source state not normalized");
  FringeDataset ds;
  ds.abscissa_name = "s";
  for (std::size_t i = 0; i < screen.points; ++i) {
    const double s = screen.abscissa(i);
    const Point2 x = screen.at(s);
    const auto [phi_B, slope] = ray_phase(geometry, tube, charge, x, opt);
    auto fp = fringe_point(fringe_terms(state, geometry, wave, x), phi_B, slope);
    fp.abscissa = s;
    ds.points.push_back(fp);
  }
  return ds;
}

FringeDataset loopless_flux_sweep(const SourceState& state, const LooplessGeometry& geometry,
                                  const FluxTube& tube, const ChargeState& charge,
                                  const WaveModel& wave, const Point2& screen,
                                  std::span<const double> fluxes, const PhaseOptions& opt) {
  if (!state.normalized(1e-9)) throw GeometryError("loopless_flux_sweep: source state not normalized");
  FringeDataset ds;
  ds.abscissa_name = "flux";
  const auto terms = fringe_terms(state, geometry, wave, screen);
  // phi_B is linear in the flux; the phase per unit flux is computed once.
  FluxTube unit_tube = tube;
  unit_tube.flux = 1.0;
  const auto [unit_phase, slope] = ray_phase(geometry, unit_tube, charge, screen, opt);
  (void)slope;
  for (double f : fluxes) {
    auto fp = fringe_point(terms, unit_phase * f, unit_phase);
    fp.abscissa = f;
    ds.points.push_back(fp);
  }
  return ds;
}

void JunctionParams::validate() const {
  if (!(rho1 > 0.0 && rho2 > 0.0 && rhoN > 0.0)) {
    throw GeometryError("junction: densities of states must be positive");
  }
  if (!(gap > 0.0)) throw GeometryError("junction: gap must be positive");
}

bool JunctionParams::validity_warning(const Units& units) const {
  return units.e * std::abs(bias) / gap > 0.1;
}

AndreevAmplitude andreev_amplitude(const JunctionParams& p, int junction, double phase,
                                   const Units& units) {
  if (junction != 1 && junction != 2) throw GeometryError("andreev_amplitude: junction is 1 or 2");
  const double rho = junction == 1 ? p.rho1 : p.rho2;
  const cplx t = junction == 1 ? p.t1 : p.t2;
  return {-kPi * rho * std::norm(t) * std::polar(1.0, phase), p.validity_warning(units)};
}

double hopping_rate(double rho_j, double rho_N, cplx t_j) {
  return 2.0 * kPi * rho_j * rho_N * std::norm(t_j);
}

AndreevPoint andreev_current(const JunctionParams& p, double flux, const Units& units) {
  p.validate();
  const double g1 = hopping_rate(p.rho1, p.rhoN, p.t1);
  const double g2 = hopping_rate(p.rho2, p.rhoN, p.t2);
  AndreevPoint pt;
  pt.flux = flux;
  pt.phi_B = units.e * flux * p.delta_theta / (kPi * units.hbar * units.c);
  pt.phi_0 = p.phi0;
  // G1^2 + G2^2 + 2 G1 G2 cos(phi) written so that the destructive minimum
  // cancels exactly: cos rounds to -1 near odd multiples of pi.
  const double bracket =
      (g1 - g2) * (g1 - g2) + 2.0 * g1 * g2 * (1.0 + std::cos(pt.phi_0 + pt.phi_B));
  pt.current = kPi * units.e * units.e / units.hbar * p.bias * bracket;
  pt.validity_warning = p.validity_warning(units);
  return pt;
}

double visibility(double gamma1, double gamma2) {
  const double den = gamma1 * gamma1 + gamma2 * gamma2;
  if (!(den > 0.0)) throw GeometryError("visibility: both rates vanish");
  return 2.0 * gamma1 * gamma2 / den;
}

FringeDataset measurement_protocol(const JunctionParams& p, std::span<const double> fluxes,
                                   const ProtocolOptions& opt, const Units& units) {
  if (opt.repetitions < 1) throw GeometryError("measurement_protocol: repetitions must be >= 1");
  if (opt.noise_sigma < 0.0) throw GeometryError("measurement_protocol: negative noise");
  p.validate();
  FringeDataset ds;
  ds.abscissa_name = "flux";
  ds.points.resize(fluxes.size());
  ds.validity_warning = p.validity_warning(units);
  const double vis = visibility(hopping_rate(p.rho1, p.rhoN, p.t1), hopping_rate(p.rho2, p.rhoN, p.t2));

  auto measure = [&](std::size_t i) {
    const AndreevPoint clean = andreev_current(p, fluxes[i], units);
    FringePoint& fp = ds.points[i];
    fp.abscissa = fluxes[i];
    fp.phi_B = clean.phi_B;
    fp.phi_0 = clean.phi_0;
    fp.visibility = vis;
    if (opt.noise_sigma == 0.0) {
      fp.intensity = clean.current;
      fp.std_error = 0.0;
      return;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, opt.noise_sigma);
    // Welford running mean and variance.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < opt.repetitions; ++k) {
      const double draw = clean.current + noise(rng);
      const double delta = draw - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (draw - mean);
    }
    fp.intensity = mean;
    const double n = static_cast<double>(opt.repetitions);
    fp.std_error = opt.repetitions > 1 ? std::sqrt(m2 / (n - 1.0) / n) : opt.noise_sigma;
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(fluxes.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < fluxes.size(); ++i) measure(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < fluxes.size(); i += threads) measure(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return ds;
}

}  // namespace abphase
