#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "abphase/em_fields.hpp"
#include "abphase/field_interaction.hpp"
#include "abphase/phase_engine.hpp"
#include "abphase/units.hpp"
#include "abphase/vec.hpp"

namespace abphase {

using cplx = std::complex<double>;

/// Two independent sources, each in the superposition u_j + v_j c_j^dagger
/// of vacuum and one particle.
struct SourceState {
  cplx u1{1.0};
  cplx v1{0.0};
  cplx u2{1.0};
  cplx v2{0.0};

  bool normalized(double tol = 1e-12) const;
  /// u_j = v_j = 1/sqrt(2).
  static SourceState balanced();
};

/// Scalar outgoing wave exp(i k r) / max(r, r_min).
struct WaveModel {
  double k = 1.0;
  double r_min = 1e-3;
};

/// Throws GeometryError when source and screen point coincide.
cplx wave_amplitude(const Point2& source, const Point2& screen, const WaveModel& wave);

struct FringePoint {
  double abscissa = 0.0;   // screen coordinate or flux
  double intensity = 0.0;  // P or I
  double std_error = 0.0;
  double phi_B = 0.0;
  double phi_0 = 0.0;
  double visibility = 0.0;
  double dintensity_dflux = 0.0;
};

struct FringeDataset {
  std::string abscissa_name;
  std::vector<FringePoint> points;
  bool validity_warning = false;
};

struct LooplessGeometry {
  Point2 source1{};
  Point2 source2{};
};

/// Screen points origin + s * direction for `points` values of s spread
/// evenly over [s_min, s_max]; s is the dataset abscissa.
struct ScreenLine {
  Point2 origin{};
  Vec2 direction{0.0, 1.0};
  double s_min = -1.0;
  double s_max = 1.0;
  std::size_t points = 51;

  Point2 at(double s) const { return origin + direction * s; }
  double abscissa(std::size_t i) const;
};

/// Detection probability along the screen. phi_B is the local-theory phase
/// difference of the rays source1->x and source2->x, so it follows the
/// geometry point by point.
FringeDataset loopless_fringe(const SourceState& state, const LooplessGeometry& geometry,
                              const FluxTube& tube, const ChargeState& charge,
                              const WaveModel& wave, const ScreenLine& screen,
                              const PhaseOptions& opt = {});

/// P at one screen point as the tube flux is swept.
FringeDataset loopless_flux_sweep(const SourceState& state, const LooplessGeometry& geometry,
                                  const FluxTube& tube, const ChargeState& charge,
                                  const WaveModel& wave, const Point2& screen,
                                  std::span<const double> fluxes, const PhaseOptions& opt = {});

struct JunctionParams {
  double rho1 = 1.0;  // superconductor densities of states
  double rho2 = 1.0;
  double rhoN = 1.0;  // normal metal density of states
  cplx t1{1.0};       // tunnelling amplitudes
  cplx t2{1.0};
  double gap = 1.0;
  double bias = 1e-3;
  double tau = 1.0;   // pulse duration; carried as metadata
  double delta_theta = 2.0 * 3.14159265358979323846;
  double phi0 = 0.0;

  /// Throws GeometryError on non-positive densities of states or gap.
  void validate() const;
  /// e V / gap > 0.1: the bias-independent amplitude is outside its range.
  bool validity_warning(const Units& units = {}) const;
};

struct AndreevAmplitude {
  cplx value;
  bool validity_warning = false;
};

/// -pi rho_j |t_j|^2 exp(i phase_j) for junction 1 or 2.
AndreevAmplitude andreev_amplitude(const JunctionParams& p, int junction, double phase,
                                   const Units& units = {});

/// 2 pi rho_j rho_N |t_j|^2.
double hopping_rate(double rho_j, double rho_N, cplx t_j);

struct AndreevPoint {
  double flux = 0.0;
  double current = 0.0;
  double phi_B = 0.0;
  double phi_0 = 0.0;
  bool validity_warning = false;
};

AndreevPoint andreev_current(const JunctionParams& p, double flux, const Units& units = {});

/// 2 G1 G2 / (G1^2 + G2^2); throws GeometryError when both vanish.
double visibility(double gamma1, double gamma2);

struct ProtocolOptions {
  std::size_t repetitions = 1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  /// Worker threads; results do not depend on it.
  unsigned threads = 1;
};

/// For each flux: `repetitions` noisy current measurements averaged, with the
/// standard error of the mean. Each flux point draws from its own generator
/// seeded by (seed, index).
FringeDataset measurement_protocol(const JunctionParams& p, std::span<const double> fluxes,
                                   const ProtocolOptions& opt, const Units& units = {});

}  // namespace abphase
