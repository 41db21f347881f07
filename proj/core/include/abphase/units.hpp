#pragma once

namespace abphase {

/// Gaussian-unit constants. The default is natural mode (hbar = c = 1), in
/// which q*Phi/(hbar*c) is the dimensionless Aharonov-Bohm phase.
struct Units {
  double hbar = 1.0;
  double c = 1.0;
  double e = 1.0;  // elementary charge magnitude, used by the Andreev device

  static constexpr Units natural() { return {}; }
};

}  // namespace abphase
