#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "abphase/errors.hpp"
#include "abphase/interferometers.hpp"
#include "abphase/sinusoid_fit.hpp"

using namespace abphase;

namespace {

constexpr double kPi = std::numbers::pi;

FluxTube tube(double flux) {
  FluxTube t;
  t.flux = flux;
  return t;
}

const ChargeState kUnit{1.0, 1.0, {}, {}};
const LooplessGeometry kGeo{{-2.0, 1.0}, {-2.0, -1.0}};

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

JunctionParams symmetric_junction() {
  JunctionParams p;
  p.rho1 = p.rho2 = 1.0 / (2.0 * kPi);
  p.rhoN = 1.0;
  return p;
}

}  // namespace

TEST(WaveAmplitude, ModelProperties) {
  const WaveModel w{3.0, 1e-3};
  const Point2 x{4.0, 0.0};
  EXPECT_NEAR(std::abs(wave_amplitude(kGeo.source1, x, w)), std::abs(wave_amplitude(kGeo.source2, x, w)), 1e-15);
  const cplx near = wave_amplitude({0.0, 0.0}, {1.0, 0.0}, w);
  const cplx far = wave_amplitude({0.0, 0.0}, {2.0, 0.0}, w);
  EXPECT_NEAR(std::abs(far), 0.5 * std::abs(near), 1e-15);
  const double r1 = norm(x - kGeo.source1);
  const double r2 = norm(x - Point2{-2.0, 0.5});
  const double dphi = std::arg(wave_amplitude(kGeo.source1, x, w) / wave_amplitude({-2.0, 0.5}, x, w));
  EXPECT_NEAR(std::remainder(dphi - w.k * (r1 - r2), 2.0 * kPi), 0.0, 1e-12);
  EXPECT_THROW(wave_amplitude(x, x, w), GeometryError);
}

TEST(LooplessFringe, NormalElectronsShowNoFringe) {
  SourceState s = SourceState::balanced();
  s.v1 = 0.0;
  s.u1 = 1.0;
  ScreenLine screen;
  screen.origin = {4.0, 0.0};
  screen.points = 21;
  const auto ds = loopless_fringe(s, kGeo, tube(1.3), kUnit, {5.0, 1e-3}, screen);
  for (const auto& p : ds.points) {
    EXPECT_EQ(p.dintensity_dflux, 0.0);
    EXPECT_EQ(p.visibility, 0.0);
  }
  const auto fluxes = linspace(0.0, 10.0, 11);
  const auto sweep = loopless_flux_sweep(s, kGeo, tube(0.0), kUnit, {5.0, 1e-3}, {4.0, 0.2}, fluxes);
  for (const auto& p : sweep.points) EXPECT_EQ(p.intensity, sweep.points.front().intensity);
}

TEST(LooplessFringe, ConstructiveAtEquidistantPointWithoutFlux) {
  ScreenLine screen;
  screen.origin = {4.0, 0.0};
  screen.s_min = -1.0;
  screen.s_max = 1.0;
  screen.points = 41;
  const auto ds = loopless_fringe(SourceState::balanced(), kGeo, tube(0.0), kUnit, {5.0, 1e-3}, screen);
  const auto& mid = ds.points[20];
  EXPECT_EQ(mid.abscissa, 0.0);
  EXPECT_NEAR(mid.phi_0, 0.0, 1e-15);
  const double direct = std::norm(0.5 * wave_amplitude(kGeo.source1, {4.0, 0.0}, {5.0, 1e-3}));
  EXPECT_NEAR(mid.intensity, 4.0 * direct, 1e-15);
  for (const auto& p : ds.points) EXPECT_GE(p.intensity, 0.0);
}

TEST(LooplessFringe, FluxSweepPeriodFromSubtendedAngle) {
  const Point2 x{4.0, 0.3};
  const auto fluxes = linspace(0.0, 30.0, 301);
  const auto sweep = loopless_flux_sweep(SourceState::balanced(), kGeo, tube(0.0), kUnit,
                                         {5.0, 1e-3}, x, fluxes);
  const double dtheta = two_path_geometry(kGeo.source1, kGeo.source2, x, {}).delta_theta;
  // Direct evaluation against the closed form.
  const cplx a = 0.5 * wave_amplitude(kGeo.source1, x, {5.0, 1e-3});
  const cplx b = 0.5 * wave_amplitude(kGeo.source2, x, {5.0, 1e-3});
  for (const auto& p : sweep.points) {
    const double phi = analytic_open_phase(1.0, p.abscissa, dtheta) + std::arg(a) - std::arg(b);
    const double P = std::norm(a) + std::norm(b) + 2.0 * std::abs(a) * std::abs(b) * std::cos(phi);
    EXPECT_NEAR(p.intensity, P, 1e-12);
  }
  std::vector<double> y;
  for (const auto& p : sweep.points) y.push_back(p.intensity);
  const auto fit = fit_sinusoid(fluxes, y);
  EXPECT_NEAR(fit.period(), 2.0 * kPi / (std::abs(dtheta) / (2.0 * kPi)), 1e-8);
  // dP/dPhi against finite differences of the sweep.
  for (std::size_t i = 1; i + 1 < sweep.points.size(); i += 37) {
    const double fd = (y[i + 1] - y[i - 1]) / (fluxes[i + 1] - fluxes[i - 1]);
    EXPECT_NEAR(sweep.points[i].dintensity_dflux, fd, 1e-4 * std::abs(sweep.points[i].visibility));
  }
}

TEST(LooplessFringe, RejectsUnnormalizedState) {
  SourceState s{1.0, 1.0, 1.0, 0.0};
  ScreenLine screen;
  screen.origin = {4.0, 0.0};
  EXPECT_THROW(loopless_fringe(s, kGeo, tube(1.0), kUnit, {}, screen), GeometryError);
}

TEST(Andreev, AmplitudeProperties) {
  JunctionParams p;
  p.rho1 = 0.7;
  p.t1 = cplx{0.3, 0.4};
  const auto a = andreev_amplitude(p, 1, 1.1);
  EXPECT_NEAR(std::abs(a.value), kPi * 0.7 * 0.25, 1e-15);
  EXPECT_NEAR(std::abs(andreev_amplitude(p, 1, 1.1 + 2.0 * kPi).value - a.value), 0.0, 1e-15);
  p.t2 = 0.0;
  EXPECT_EQ(std::abs(andreev_amplitude(p, 2, 0.3).value), 0.0);
  p.bias = 0.5;
  EXPECT_TRUE(andreev_amplitude(p, 1, 0.0).validity_warning);
  EXPECT_THROW(andreev_amplitude(p, 3, 0.0), GeometryError);
}

TEST(Andreev, HoppingRate) {
  EXPECT_NEAR(hopping_rate(1.0 / (2.0 * kPi), 1.0 / (2.0 * kPi), 1.0), 1.0 / (2.0 * kPi), 1e-16);
  EXPECT_NEAR(hopping_rate(0.3, 0.5, 2.0), 4.0 * hopping_rate(0.3, 0.5, 1.0), 1e-15);
  EXPECT_EQ(hopping_rate(0.3, 0.5, 0.0), 0.0);
}

TEST(Andreev, CurrentExtremes) {
  const Units u{1.0, 1.0, 1.0};
  JunctionParams p = symmetric_junction();
  const double g = hopping_rate(p.rho1, p.rhoN, p.t1);
  const auto in_phase = andreev_current(p, 0.0, u);
  EXPECT_NEAR(in_phase.current, 4.0 * kPi * u.e * u.e * p.bias * g * g / u.hbar, 1e-16);
  p.phi0 = kPi;
  EXPECT_EQ(andreev_current(p, 0.0, u).current, 0.0);
}

TEST(Andreev, FluxPeriodAndChargeTwoCorrespondence) {
  const Units u{1.054571817e-27, 2.99792458e10, 4.80320471e-10};
  JunctionParams p = symmetric_junction();
  p.t2 = 0.7;
  p.phi0 = 0.3;
  p.bias = 1e-3 * p.gap / u.e;
  const double period = kPi * u.hbar * u.c / u.e;
  for (double f : {0.0, 0.37 * period, 1.9 * period}) {
    const double i0 = andreev_current(p, f, u).current;
    const double i1 = andreev_current(p, f + period, u).current;
    EXPECT_NEAR(i1, i0, 1e-12 * i0);
    EXPECT_NEAR(andreev_current(p, f, u).phi_B, analytic_open_phase(2.0 * u.e, f, p.delta_theta, u),
                1e-12 * (1.0 + std::abs(andreev_current(p, f, u).phi_B)));
  }
}

TEST(Andreev, CurrentBounds) {
  JunctionParams p = symmetric_junction();
  p.t2 = cplx{0.2, 0.5};
  p.delta_theta = 1.3;
  const double g1 = hopping_rate(p.rho1, p.rhoN, p.t1);
  const double g2 = hopping_rate(p.rho2, p.rhoN, p.t2);
  const double pref = kPi * p.bias;
  for (double f = 0.0; f < 20.0; f += 0.173) {
    const double i = andreev_current(p, f).current;
    EXPECT_GE(i, pref * (g1 - g2) * (g1 - g2) * (1 - 1e-12));
    EXPECT_LE(i, pref * (g1 + g2) * (g1 + g2) * (1 + 1e-12));
  }
}

TEST(Andreev, VisibilityFormulaAndSweepExtremes) {
  EXPECT_EQ(visibility(1.0, 1.0), 1.0);
  EXPECT_EQ(visibility(1.0, 0.0), 0.0);
  EXPECT_THROW(visibility(0.0, 0.0), GeometryError);
  JunctionParams p = symmetric_junction();
  p.rho2 = 0.5 * p.rho1;
  // phi_B = 2 Phi: extremes at multiples of pi/2.
  const auto fluxes = linspace(0.0, 2.0 * kPi, 9);
  double hi = 0.0;
  double lo = 1e300;
  for (double f : fluxes) {
    const double i = andreev_current(p, f).current;
    hi = std::max(hi, i);
    lo = std::min(lo, i);
  }
  const double g1 = hopping_rate(p.rho1, p.rhoN, p.t1);
  const double g2 = hopping_rate(p.rho2, p.rhoN, p.t2);
  EXPECT_NEAR((hi - lo) / (hi + lo), visibility(g1, g2), 1e-10);
  EXPECT_NEAR(visibility(g1, g2), 0.8, 1e-15);
}

TEST(Protocol, NoiselessEqualsDirectSweep) {
  const JunctionParams p = symmetric_junction();
  const auto fluxes = linspace(0.0, 5.0, 17);
  ProtocolOptions opt;
  opt.repetitions = 5;
  const auto ds = measurement_protocol(p, fluxes, opt);
  for (std::size_t i = 0; i < fluxes.size(); ++i) {
    EXPECT_EQ(ds.points[i].intensity, andreev_current(p, fluxes[i]).current);
    EXPECT_EQ(ds.points[i].std_error, 0.0);
  }
}

TEST(Protocol, StandardErrorScalesAsSigmaOverRootN) {
  const JunctionParams p = symmetric_junction();
  const auto fluxes = linspace(0.0, 5.0, 1000);
  ProtocolOptions opt;
  opt.repetitions = 64;
  opt.noise_sigma = 0.2;
  opt.seed = 12345;
  const auto ds = measurement_protocol(p, fluxes, opt);
  double mean_se = 0.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < fluxes.size(); ++i) {
    mean_se += ds.points[i].std_error / static_cast<double>(fluxes.size());
    const double z = (ds.points[i].intensity - andreev_current(p, fluxes[i]).current) /
                     (opt.noise_sigma / std::sqrt(64.0));
    chi2 += z * z / static_cast<double>(fluxes.size());
  }
  EXPECT_NEAR(mean_se, opt.noise_sigma / 8.0, 0.2 * opt.noise_sigma / 8.0);
  EXPECT_NEAR(chi2, 1.0, 0.2);
}

TEST(Protocol, DeterministicAndThreadIndependent) {
  const JunctionParams p = symmetric_junction();
  const auto fluxes = linspace(0.0, 5.0, 101);
  ProtocolOptions opt;
  opt.repetitions = 100;
  opt.noise_sigma = 0.01;
  opt.seed = 7;
  const auto a = measurement_protocol(p, fluxes, opt);
  opt.threads = 4;
  const auto b = measurement_protocol(p, fluxes, opt);
  opt.seed = 8;
  const auto c = measurement_protocol(p, fluxes, opt);
  bool differs = false;
  for (std::size_t i = 0; i < fluxes.size(); ++i) {
    EXPECT_EQ(a.points[i].intensity, b.points[i].intensity);
    EXPECT_EQ(a.points[i].std_error, b.points[i].std_error);
    differs = differs || a.points[i].intensity != c.points[i].intensity;
  }
  EXPECT_TRUE(differs);
}

TEST(Protocol, FitRecoversPhaseSlope) {
  const JunctionParams p = symmetric_junction();
  const auto fluxes = linspace(0.0, 4.0 * kPi, 121);
  const double imax = andreev_current(p, 0.0).current;
  ProtocolOptions opt;
  opt.repetitions = 400;
  opt.noise_sigma = 0.1 * imax;
  opt.seed = 99;
  const auto ds = measurement_protocol(p, fluxes, opt);
  std::vector<double> y;
  std::vector<double> s;
  for (const auto& pt : ds.points) {
    y.push_back(pt.intensity);
    s.push_back(pt.std_error);
  }
  const auto fit = fit_sinusoid(fluxes, y, s);
  const double slope = p.delta_theta / kPi;
  EXPECT_LT(std::abs(fit.omega - slope), 3.0 * fit.omega_se);
}
