#include "abphase/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "abphase/errors.hpp"

namespace abphase {

namespace {

constexpr double kCloseTol = 1e-12;

double distance_to_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(a + ab * s - p);
}

std::vector<double> uniform_times(double t0, double t1, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = i + 1 == n ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return t;
}

}  // namespace

Trajectory::Trajectory(std::vector<TrajectorySample> samples, bool closed, std::string metadata)
    : samples_(std::move(samples)), closed_(closed), metadata_(std::move(metadata)) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t > samples_[i - 1].t)) {
      throw GeometryError("trajectory times must be strictly increasing (sample " +
                          std::to_string(i) + ")");
    }
  }
  if (closed_) {
    if (samples_.size() < 3) throw GeometryError("closed trajectory needs at least 3 samples");
    const double gap = norm(samples_.back().position - samples_.front().position);
    if (gap > kCloseTol * std::max(1.0, norm(samples_.front().position))) {
      throw GeometryError("closed trajectory does not return to its start");
    }
  }
}

Trajectory straight_path(const Point2& from, const Point2& to, double speed,
                         const PathOptions& opt) {
  const double len = norm(to - from);
  if (!(len > 0.0)) throw GeometryError("straight_path: coincident end points");
  if (!(speed > 0.0)) throw GeometryError("straight_path: speed must be positive");
  if (opt.points < 2) throw GeometryError("straight_path: need at least 2 samples");
  const double T = len / speed;
  const Vec2 v = (to - from) / T;
  const auto times = uniform_times(0.0, T, opt.points);
  std::vector<TrajectorySample> s(opt.points);
  for (std::size_t i = 0; i < opt.points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(opt.points - 1);
    s[i] = {opt.t0 + times[i], i + 1 == opt.points ? to : from + (to - from) * f, v};
  }
  return Trajectory(std::move(s), false, "straight");
}

Trajectory arc_path(const Point2& center, double radius, double theta_start, double theta_end,
                    double speed, const PathOptions& opt) {
  if (!(radius > 0.0)) throw GeometryError("arc_path: radius must be positive");
  if (!(speed > 0.0)) throw GeometryError("arc_path: speed must be positive");
  if (theta_end == theta_start) throw GeometryError("arc_path: empty angular span");
  if (opt.points < 3) throw GeometryError("arc_path: need at least 3 samples");
  const double span = theta_end - theta_start;
  const double windings = span / (2.0 * std::numbers::pi);
  const bool closed = std::abs(windings - std::round(windings)) < 1e-12;
  const double T = std::abs(span) * radius / speed;
  const double omega = span / T;
  std::vector<TrajectorySample> s(opt.points);
  const auto times = uniform_times(0.0, T, opt.points);
  for (std::size_t i = 0; i < opt.points; ++i) {
    const double th = i + 1 == opt.points ? theta_end : theta_start + omega * times[i];
    s[i].t = opt.t0 + times[i];
    s[i].position = center + unit(th) * radius;
    s[i].velocity = perp(unit(th)) * (radius * omega);
  }
  if (closed) s.back().position = s.front().position;
  return Trajectory(std::move(s), closed, "arc");
}

Trajectory parametric_path(const std::function<Point2(double)>& position,
                           const std::function<Vec2(double)>& velocity, double t0, double t1,
                           std::size_t points, bool closed, std::string metadata) {
  if (!(t1 > t0)) throw GeometryError("parametric_path: empty time window");
  if (points < 2) throw GeometryError("parametric_path: need at least 2 samples");
  const auto times = uniform_times(t0, t1, points);
  std::vector<TrajectorySample> s(points);
  for (std::size_t i = 0; i < points; ++i) s[i] = {times[i], position(times[i]), velocity(times[i])};
  if (closed) s.back().position = s.front().position;
  return Trajectory(std::move(s), closed, std::move(metadata));
}

Trajectory reversed(const Trajectory& traj) {
  const auto& in = traj.samples();
  std::vector<TrajectorySample> out(in.size());
  const double t0 = traj.front().t;
  const double t1 = traj.back().t;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto& src = in[in.size() - 1 - i];
    out[i] = {t0 + (t1 - src.t), src.position, -src.velocity};
  }
  return Trajectory(std::move(out), traj.closed(), traj.metadata() + ":reversed");
}

Trajectory concatenate(const Trajectory& a, const Trajectory& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  const double gap = norm(b.front().position - a.back().position);
  if (gap > kCloseTol * std::max(1.0, norm(a.back().position))) {
    throw GeometryError("concatenate: second path does not start where the first ends");
  }
  std::vector<TrajectorySample> s = a.samples();
  const double shift = a.back().t - b.front().t;
  for (std::size_t i = 1; i < b.size(); ++i) {
    auto smp = b[i];
    smp.t += shift;
    s.push_back(smp);
  }
  const double loop_gap = norm(s.back().position - s.front().position);
  const bool closed = loop_gap <= kCloseTol * std::max(1.0, norm(s.front().position));
  if (closed) s.back().position = s.front().position;
  return Trajectory(std::move(s), closed, a.metadata() + "+" + b.metadata());
}

Trajectory resampled(const Trajectory& traj, std::size_t factor) {
  if (factor < 1) throw GeometryError("resampled: factor must be at least 1");
  const auto& in = traj.samples();
  if (in.size() < 2 || factor == 1) return traj;
  std::vector<TrajectorySample> out;
  out.reserve((in.size() - 1) * factor + 1);
  for (std::size_t i = 0; i + 1 < in.size(); ++i) {
    const auto& a = in[i];
    const auto& b = in[i + 1];
    const double dt = b.t - a.t;
    out.push_back(a);
    for (std::size_t k = 1; k < factor; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(factor);
      const double s2 = s * s;
      const double s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1;
      const double h10 = s3 - 2 * s2 + s;
      const double h01 = -2 * s3 + 3 * s2;
      const double h11 = s3 - s2;
      const double d00 = 6 * s2 - 6 * s;
      const double d10 = 3 * s2 - 4 * s + 1;
      const double d01 = -6 * s2 + 6 * s;
      const double d11 = 3 * s2 - 2 * s;
      TrajectorySample m;
      m.t = a.t + s * dt;
      m.position = a.position * h00 + a.velocity * (h10 * dt) + b.position * h01 +
                   b.velocity * (h11 * dt);
      m.velocity = (a.position * d00 + b.position * d01) / dt + a.velocity * d10 + b.velocity * d11;
      out.push_back(m);
    }
  }
  out.push_back(in.back());
  return Trajectory(std::move(out), traj.closed(), traj.metadata());
}

double subtended_angle(const Trajectory& traj, const Point2& about) {
  const auto& s = traj.samples();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const Vec2 d0 = s[i].position - about;
    const Vec2 d1 = s[i + 1].position - about;
    const double scale = std::max({1.0, norm(d0), norm(d1)});
    if (distance_to_segment(about, s[i].position, s[i + 1].position) <= kCloseTol * scale) {
      throw GeometryError("subtended_angle: path passes through the reference point");
    }
    total += std::atan2(cross(d0, d1), dot(d0, d1));
  }
  return total;
}

TwoPathGeometry two_path_geometry(const Point2& source1, const Point2& source2,
                                  const Point2& screen, const Point2& tube_center, double speed,
                                  const PathOptions& opt) {
  if (source1 == screen || source2 == screen) {
    throw GeometryError("two_path_geometry: source coincides with the screen point");
  }
  if (source1 == source2) throw GeometryError("two_path_geometry: coincident sources");
  TwoPathGeometry g;
  g.path1 = straight_path(source1, screen, speed, opt);
  g.path2 = straight_path(source2, screen, speed, opt);
  g.delta_theta = subtended_angle(g.path1, tube_center) - subtended_angle(g.path2, tube_center);
  return g;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# closed=" << (traj.closed() ? 1 : 0) << '\n';
  if (!traj.metadata().empty()) out << "# metadata=" << traj.metadata() << '\n';
  out << "t,x,y,vx,vy\n";
  for (const auto& s : traj.samples()) {
    out << s.t << ',' << s.position.x << ',' << s.position.y << ',' << s.velocity.x << ','
        << s.velocity.y << '\n';
  }
  out.precision(old_precision);
}

Trajectory read_csv(std::istream& in) {
  std::vector<TrajectorySample> samples;
  bool closed = false;
  std::string metadata;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# closed=", 0) == 0) closed = line.substr(9) == "1";
      if (line.rfind("# metadata=", 0) == 0) metadata = line.substr(11);
      continue;
    }
    if (!header_seen && line.find_first_of("tT") == 0) {
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    double v[5];
    char sep = 0;
    for (int k = 0; k < 5; ++k) {
      if (!(row >> v[k])) throw ParseError("trajectory csv: expected 5 numeric columns", lineno, 1);
      if (k < 4 && !(row >> sep && sep == ',')) {
        throw ParseError("trajectory csv: expected ','", lineno, 1);
      }
    }
    samples.push_back({v[0], {v[1], v[2]}, {v[3], v[4]}});
  }
  return Trajectory(std::move(samples), closed, metadata);
}

}  // namespace abphase
