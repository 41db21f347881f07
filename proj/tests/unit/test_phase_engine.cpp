#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "abphase/errors.hpp"
#include "abphase/expression.hpp"
#include "abphase/phase_engine.hpp"

using namespace abphase;

namespace {

constexpr double kPi = std::numbers::pi;

FluxTube tube(double flux, double radius = 0.0) {
  FluxTube t;
  t.flux = flux;
  t.radius = radius;
  return t;
}

const ChargeState kUnit{1.0, 1.0, {}, {}};

std::vector<GaugeSpec> three_gauges() {
  return {GaugeSpec::azimuthal(), GaugeSpec::dirac_string(kPi),
          gauge_transform(GaugeSpec::azimuthal(), Expression::parse("0.25*x*y"))};
}

}  // namespace

TEST(PhaseLocal, OpenArcsFollowTheSubtendedAngle) {
  const FluxTube t = tube(1.0);  // q Phi / (hbar c) = 1
  for (double dtheta : {0.3, kPi / 2, 2.5, 5.0}) {
    const auto arc = arc_path({}, 1.7, 0.2, 0.2 + dtheta, 1.0);
    const auto r = phase_local(arc, t, kUnit);
    EXPECT_NEAR(r.phase(), dtheta / (2.0 * kPi), 1e-12);
    EXPECT_EQ(r.theory(), Theory::local_field);
    EXPECT_FALSE(r.gauge().has_value());
  }
}

TEST(PhaseLocal, RadialPathAccumulatesNothing) {
  const auto p = straight_path({0.5, 0.5}, {3.0, 3.0}, 1.0);
  EXPECT_NEAR(phase_local(p, tube(1.0), kUnit).phase(), 0.0, 1e-15);
}

TEST(PhaseLocal, FullLoopGivesAharonovBohmPhase) {
  const auto loop = arc_path({}, 1.0, 0.0, 2.0 * kPi, 1.0);
  EXPECT_NEAR(phase_local(loop, tube(1.0), kUnit).phase(), 1.0, 1e-12);
  // A finite core goes through the field-momentum quadrature (target 1e-6).
  EXPECT_NEAR(phase_local(loop, tube(1.0, 0.3), kUnit).phase(), 1.0, 1e-6);
}

TEST(PhaseLocal, ReparameterizationAndAdditivity) {
  const FluxTube t = tube(1.3);
  const auto slow = straight_path({1.0, -1.0}, {-1.0, 2.0}, 0.5);
  const auto fast = straight_path({1.0, -1.0}, {-1.0, 2.0}, 7.0);
  EXPECT_NEAR(phase_local(slow, t, kUnit).phase(), phase_local(fast, t, kUnit).phase(), 1e-12);
  const auto next = straight_path({-1.0, 2.0}, {-3.0, -1.0}, 1.0);
  const auto both = concatenate(slow, next);
  EXPECT_NEAR(phase_local(both, t, kUnit).phase(),
              phase_local(slow, t, kUnit).phase() + phase_local(next, t, kUnit).phase(), 1e-12);
  const auto g = GaugeSpec::dirac_string(-0.5 * kPi);
  EXPECT_NEAR(phase_potential(both, g, t, kUnit).phase(),
              phase_potential(slow, g, t, kUnit).phase() + phase_potential(next, g, t, kUnit).phase(),
              1e-12);
}

TEST(PhasePotential, ClosedLoopsAreGaugeInvariant) {
  for (const auto& t : {tube(1.0), tube(1.0, 0.4)}) {
    const auto loop = arc_path({0.1, -0.1}, 1.2, 0.1, 0.1 + 2.0 * kPi, 1.0);
    const double local = phase_local(loop, t, kUnit).phase();
    const double local_tol = t.radius > 0.0 ? 1e-6 : 1e-8;
    for (const auto& g : three_gauges()) {
      const auto r = phase_potential(loop, g, t, kUnit);
      EXPECT_NEAR(r.phase(), 1.0, 1e-8) << g.id();
      EXPECT_EQ(r.gauge().value(), g.id());
      EXPECT_NEAR(r.phase(), local, local_tol);
    }
  }
  const auto g = GaugeSpec::dirac_string(kPi);
  const auto loop = arc_path({}, 1.0, 0.0, 2.0 * kPi, 1.0);
  EXPECT_EQ(phase_potential(loop, g, tube(1.0), kUnit).string_crossings(), 1);
}

TEST(PhasePotential, GradientTheoremForLinearGaugeFunction) {
  const Units u{2.0, 3.0, 1.0};
  PhaseOptions opt;
  opt.units = u;
  const ChargeState q{1.5, 1.0, {}, {}};
  const double k = 0.4;
  const auto path = straight_path({1.0, 1.0}, {4.0, -0.5}, 1.0);
  const auto g = gauge_transform(GaugeSpec::azimuthal(), Expression::parse("0.4*x"));
  const double d = phase_potential(path, g, tube(1.0), q, opt).phase() -
                   phase_potential(path, GaugeSpec::azimuthal(), tube(1.0), q, opt).phase();
  EXPECT_NEAR(d, q.charge / (u.hbar * u.c) * k * 3.0, 1e-12);
}

TEST(PhasePotential, AzimuthalGaugeCoincidesWithLocalPhase) {
  const auto arc = arc_path({}, 2.0, -0.4, 1.9, 1.0);
  EXPECT_NEAR(phase_potential(arc, GaugeSpec::azimuthal(), tube(0.9), kUnit).phase(),
              phase_local(arc, tube(0.9), kUnit).phase(), 1e-12);
}

TEST(PhasePotential, OpenPathCrossingTheStringThrows) {
  const auto p = straight_path({-1.0, 1.0}, {-1.0, -1.0}, 1.0);
  EXPECT_THROW(phase_potential(p, GaugeSpec::dirac_string(kPi), tube(1.0), kUnit),
               SingularityError);
}

TEST(AnalyticOpenPhase, Values) {
  const Units u{1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(analytic_open_phase(1.0, 1.0, 2.0 * kPi, u), 1.0);
  EXPECT_EQ(analytic_open_phase(1.0, 1.0, 0.0, u), 0.0);
  EXPECT_DOUBLE_EQ(analytic_open_phase(1.3, 0.7, 1.4, u), 2.0 * analytic_open_phase(1.3, 0.7, 0.7, u));
  const Units g{1.054571817e-27, 2.99792458e10, 4.80320471e-10};
  EXPECT_NEAR(analytic_open_phase(g.e, 1e-7, 2.0 * kPi, g), g.e * 1e-7 / (g.hbar * g.c), 1e-12);
}

TEST(GaugeAudit, ClosedLoopVerdict) {
  const auto loop = arc_path({}, 1.0, 0.0, 2.0 * kPi, 1.0);
  const auto rep = gauge_audit(loop, three_gauges(), tube(1.0), kUnit);
  EXPECT_TRUE(rep.closed);
  EXPECT_LT(rep.spread, 1e-8);
  EXPECT_EQ(rep.verdict, "gauge-invariant");
  EXPECT_EQ(rep.local_spread, 0.0);
  EXPECT_EQ(rep.rows.size(), 3u);
}

TEST(GaugeAudit, OpenPathSpreadFromGradientTheorem) {
  const double k = 0.6;
  const auto path = straight_path({1.0, -2.0}, {3.5, 1.0}, 1.0);
  const std::vector<GaugeSpec> gauges{
      GaugeSpec::azimuthal(), gauge_transform(GaugeSpec::azimuthal(), Expression::parse("0.6*x"))};
  const auto rep = gauge_audit(path, gauges, tube(1.0), kUnit);
  EXPECT_NEAR(rep.spread, k * 2.5, 1e-12);
  EXPECT_EQ(rep.verdict, "gauge-dependent");
  EXPECT_EQ(rep.local_spread, 0.0);
  for (const auto& row : rep.rows) EXPECT_EQ(row.local_phase, rep.local_phase);
  EXPECT_THROW(gauge_audit(path, {GaugeSpec::azimuthal()}, tube(1.0), kUnit), GeometryError);
}

TEST(TwoPath, ClosedPairAgreesAcrossTheories) {
  const auto upper = arc_path({}, 1.0, 0.0, kPi, 1.0);
  const auto lower = arc_path({}, 1.0, 0.0, -kPi, 1.0);
  const double local = two_path_phase_difference(upper, lower, tube(1.0), kUnit, Theory::local_field).phase();
  for (const auto& g : three_gauges()) {
    const double pot =
        two_path_phase_difference(upper, lower, tube(1.0), kUnit, Theory::potential, g).phase();
    EXPECT_NEAR(pot, local, 1e-8) << g.id();
  }
  EXPECT_NEAR(local, 1.0, 1e-8);
}

TEST(TwoPath, LooplessLocalPhaseAndPotentialMismatch) {
  const Point2 s1{-2.0, 1.0};
  const Point2 s2{-2.0, -1.0};
  const auto geo = two_path_geometry(s1, s2, {4.0, 0.3}, {});
  const FluxTube t = tube(1.7);
  const auto local =
      two_path_phase_difference(geo.path1, geo.path2, t, kUnit, Theory::local_field);
  EXPECT_NEAR(local.phase(), analytic_open_phase(1.0, 1.7, geo.delta_theta), 1e-10);

  const auto chi = Expression::parse("0.25*x*y");
  const auto g0 = GaugeSpec::azimuthal();
  const auto g1 = gauge_transform(g0, chi);
  const double p0 = two_path_phase_difference(geo.path1, geo.path2, t, kUnit, Theory::potential, g0).phase();
  const double p1 = two_path_phase_difference(geo.path1, geo.path2, t, kUnit, Theory::potential, g1).phase();
  // Difference of the open segments: chi(S2) - chi(S1).
  EXPECT_NEAR(p1 - p0, chi.value(s2) - chi.value(s1), 1e-10);
  EXPECT_GT(std::abs(p1 - p0), 0.1);
}
