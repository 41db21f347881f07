#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "abphase/quadrature.hpp"
#include "abphase/vec.hpp"

namespace abphase {

struct TrajectorySample {
  double t = 0.0;
  Point2 position{};
  Vec2 velocity{};
};

/// Time-stamped path. Geometric operations (line integrals, winding angles,
/// string crossings) treat it as the polyline through its samples.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws GeometryError unless times strictly increase and, when `closed`,
  /// the end points coincide to 1e-12.
  Trajectory(std::vector<TrajectorySample> samples, bool closed, std::string metadata = {});

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const TrajectorySample& operator[](std::size_t i) const { return samples_[i]; }
  const TrajectorySample& front() const { return samples_.front(); }
  const TrajectorySample& back() const { return samples_.back(); }
  bool closed() const { return closed_; }
  const std::string& metadata() const { return metadata_; }
  double duration() const { return samples_.empty() ? 0.0 : back().t - front().t; }

 private:
  std::vector<TrajectorySample> samples_;
  bool closed_ = false;
  std::string metadata_;
};

struct PathOptions {
  std::size_t points = 1000;  // samples per path, end points included
  double t0 = 0.0;
};

Trajectory straight_path(const Point2& from, const Point2& to, double speed,
                         const PathOptions& opt = {});

/// Arc about `center` traversed at constant speed from theta_start to
/// theta_end (any span, multiple windings allowed). Closed when the span is a
/// nonzero multiple of 2 pi.
Trajectory arc_path(const Point2& center, double radius, double theta_start, double theta_end,
                    double speed, const PathOptions& opt = {});

/// Samples r(t), v(t) at `points` equally spaced times on [t0, t1].
Trajectory parametric_path(const std::function<Point2(double)>& position,
                           const std::function<Vec2(double)>& velocity, double t0, double t1,
                           std::size_t points, bool closed, std::string metadata = "parametric");

/// Same path traversed backwards over the same time window.
Trajectory reversed(const Trajectory& traj);

/// b appended to a; b is shifted in time to start where a ends and must start
/// at a's final position.
Trajectory concatenate(const Trajectory& a, const Trajectory& b);

/// Inserts `factor - 1` samples in each interval by cubic Hermite
/// interpolation of the stored positions and velocities.
Trajectory resampled(const Trajectory& traj, std::size_t factor);

/// Accumulated signed winding angle about `about` (counterclockwise
/// positive). Throws GeometryError if the polyline passes through `about`.
double subtended_angle(const Trajectory& traj, const Point2& about);

struct TwoPathGeometry {
  Trajectory path1;
  Trajectory path2;
  double delta_theta = 0.0;  // subtended(path1) - subtended(path2)
};

/// Straight rays source1 -> screen and source2 -> screen.
TwoPathGeometry two_path_geometry(const Point2& source1, const Point2& source2,
                                  const Point2& screen, const Point2& tube_center,
                                  double speed = 1.0, const PathOptions& opt = {});

/// Columns t,x,y,vx,vy; comment lines carry the closed flag and metadata.
void write_csv(const Trajectory& traj, std::ostream& out);
Trajectory read_csv(std::istream& in);

/// Line integral of the planar field f along the polyline, each segment
/// integrated adaptively.
template <class Field>
quad::Estimate<double> integrate_along(const Trajectory& traj, Field&& f,
                                       const quad::Tolerance& tol) {
  quad::Estimate<double> total;
  const auto& s = traj.samples();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const Point2 p0 = s[i].position;
    const Vec2 step = s[i + 1].position - p0;
    if (step == Vec2{}) continue;
    const auto seg = quad::integrate(
        [&](double u) -> double { return dot(f(p0 + step * u), step); }, 0.0, 1.0, tol);
    total.value += seg.value;
    total.error += seg.error;
    total.l1 += seg.l1;
    total.evaluations += seg.evaluations;
    total.converged = total.converged && seg.converged;
  }
  return total;
}

}  // namespace abphase
