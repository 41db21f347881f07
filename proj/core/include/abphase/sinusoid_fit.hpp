#pragma once

#include <cstddef>
#include <span>

namespace abphase {

/// y = offset + amplitude * cos(omega x + phase), amplitude >= 0.
struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double offset_se = 0.0;
  double amplitude_se = 0.0;
  double omega_se = 0.0;
  double phase_se = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;
  bool converged = false;

  double period() const;
  double period_se() const;
};

/// Nonlinear least squares (Levenberg-Marquardt) started from a periodogram
/// peak. With `sigma` the standard errors are absolute; without it they are
/// scaled by the residual variance.
SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y,
                         std::span<const double> sigma = {});

}  // namespace abphase
