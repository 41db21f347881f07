#include "abphase/sinusoid_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "abphase/errors.hpp"

namespace abphase {

namespace {

// Linear part of the model for fixed omega: columns 1, cos, sin.
struct LinearFit {
  Eigen::Vector3d coef;
  double chi2 = 0.0;
};

LinearFit linear_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                     double omega) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd A(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    A(i, 0) = s;
    A(i, 1) = s * std::cos(omega * x[i]);
    A(i, 2) = s * std::sin(omega * x[i]);
  }
  const Eigen::VectorXd b = y.cwiseProduct(w.cwiseSqrt());
  LinearFit f;
  f.coef = A.colPivHouseholderQr().solve(b);
  f.chi2 = (A * f.coef - b).squaredNorm();
  return f;
}

}  // namespace

double SinusoidFit::period() const { return 2.0 * std::numbers::pi / omega; }

double SinusoidFit::period_se() const {
  return 2.0 * std::numbers::pi * omega_se / (omega * omega);
}

SinusoidFit fit_sinusoid(std::span<const double> xs, std::span<const double> ys,
                         std::span<const double> sigma) {
  const std::size_t n = xs.size();
  if (ys.size() != n) throw GeometryError("fit_sinusoid: x and y differ in length");
  if (!sigma.empty() && sigma.size() != n) throw GeometryError("fit_sinusoid: sigma length");
  if (n < 5) throw GeometryError("fit_sinusoid: need at least 5 points");

  Eigen::VectorXd x(n), y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = xs[i];
    y[i] = ys[i];
    if (sigma.empty()) {
      w[i] = 1.0;
    } else {
      if (!(sigma[i] > 0.0)) throw GeometryError("fit_sinusoid: sigma must be positive");
      w[i] = 1.0 / (sigma[i] * sigma[i]);
    }
  }

  // Periodogram over frequencies from one cycle per span up to Nyquist.
  const double span = x.maxCoeff() - x.minCoeff();
  if (!(span > 0.0)) throw GeometryError("fit_sinusoid: degenerate abscissa");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double min_dx = span;
  for (std::size_t i = 1; i < n; ++i) {
    if (sorted[i] > sorted[i - 1]) min_dx = std::min(min_dx, sorted[i] - sorted[i - 1]);
  }
  const double w_lo = 0.5 * std::numbers::pi / span;
  const double w_hi = std::numbers::pi / min_dx;
  const std::size_t grid = std::max<std::size_t>(200, 8 * n);
  double best_omega = w_lo;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= grid; ++k) {
    const double om = w_lo + (w_hi - w_lo) * static_cast<double>(k) / static_cast<double>(grid);
    const double c2 = linear_fit(x, y, w, om).chi2;
    if (c2 < best_chi2) {
      best_chi2 = c2;
      best_omega = om;
    }
  }

  // Levenberg-Marquardt on (offset, c1, c2, omega).
  Eigen::Vector4d p;
  {
    const auto lf = linear_fit(x, y, w, best_omega);
    p << lf.coef[0], lf.coef[1], lf.coef[2], best_omega;
  }
  auto residuals = [&](const Eigen::Vector4d& q, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(static_cast<Eigen::Index>(n));
    if (J) J->resize(static_cast<Eigen::Index>(n), 4);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sqrt(w[i]);
      const double c = std::cos(q[3] * x[i]);
      const double sn = std::sin(q[3] * x[i]);
      r[i] = s * (q[0] + q[1] * c + q[2] * sn - y[i]);
      if (J) {
        (*J)(i, 0) = s;
        (*J)(i, 1) = s * c;
        (*J)(i, 2) = s * sn;
        (*J)(i, 3) = s * x[i] * (-q[1] * sn + q[2] * c);
      }
    }
  };

  SinusoidFit fit;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  residuals(p, r, &J);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::Matrix4d JtJ = J.transpose() * J;
    const Eigen::Vector4d g = J.transpose() * r;
    Eigen::Matrix4d Aug = JtJ;
    Aug.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-300);
    const Eigen::Vector4d step = Aug.ldlt().solve(-g);
    const Eigen::Vector4d trial = p + step;
    Eigen::VectorXd rt;
    residuals(trial, rt, nullptr);
    const double trial_cost = rt.squaredNorm();
    if (trial_cost <= cost) {
      const double rel_change = (cost - trial_cost) / std::max(cost, 1e-300);
      p = trial;
      cost = trial_cost;
      residuals(p, r, &J);
      lambda = std::max(lambda * 0.1, 1e-15);
      const bool small_step = step.cwiseAbs().maxCoeff() <=
                              1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff());
      if (rel_change < 1e-15 || small_step) {
        fit.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        fit.converged = true;  // no further decrease is possible
        break;
      }
    }
  }

  const Eigen::Matrix4d cov_raw = (J.transpose() * J).inverse();
  fit.dof = n - 4;
  fit.chi2 = cost;
  const double scale = sigma.empty() ? cost / static_cast<double>(fit.dof) : 1.0;
  const Eigen::Matrix4d cov = cov_raw * scale;

  fit.offset = p[0];
  fit.omega = p[3];
  const double c1 = p[1];
  const double c2 = p[2];
  fit.amplitude = std::hypot(c1, c2);
  fit.phase = std::atan2(-c2, c1);
  if (fit.omega < 0.0) {
    // cos(-w x + ph) = cos(w x - ph)
    fit.omega = -fit.omega;
    fit.phase = -fit.phase;
  }
  fit.offset_se = std::sqrt(cov(0, 0));
  fit.omega_se = std::sqrt(cov(3, 3));
  // Propagate (c1, c2) to amplitude and phase.
  const double A = fit.amplitude;
  if (A > 0.0) {
    Eigen::Vector2d ga(c1 / A, c2 / A);
    Eigen::Vector2d gp(c2 / (A * A), -c1 / (A * A));
    const Eigen::Matrix2d cc = cov.block<2, 2>(1, 1);
    fit.amplitude_se = std::sqrt(ga.dot(cc * ga));
    fit.phase_se = std::sqrt(gp.dot(cc * gp));
  }
  return fit;
}

}  // namespace abphase
