#include "mavnav/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mavnav {

namespace {

constexpr double kTimeEps = 1e-9;

void sample(const PiecewiseTrajectory& traj, const TrackerConfig& config, TrackerStatus& status) {
  status.waypoints.clear();
  status.waypoint_times.clear();
  status.path.clear();
  const double start = traj.start_time();
  const double end = traj.end_time();

  for (int k = 0;; ++k) {
    const double t = start + k * config.dt_sample;
    if (t >= end - kTimeEps) break;
    status.path.push_back(traj.state_at(t).p);
  }
  status.path.push_back(traj.state_at(end).p);

  for (int k = 0;; ++k) {
    const double t = start + config.t0 + k * config.dt_sample;
    if (t >= end - kTimeEps) break;
    status.waypoint_times.push_back(t);
    status.waypoints.push_back(traj.state_at(t).p);
  }
  status.waypoint_times.push_back(end);
  status.waypoints.push_back(traj.state_at(end).p);
}

}  // namespace

void TrackerConfig::validate() const {
  if (!(dt_sample > 0.0)) throw std::invalid_argument("tracker.dt_sample: must be > 0");
  if (!(t0 >= 0.0)) throw std::invalid_argument("tracker.t0: must be >= 0");
  if (!(publish_rate > 0.0)) throw std::invalid_argument("tracker.publish_rate: must be > 0");
  if (!(d_tracking > 0.0)) throw std::invalid_argument("tracker.d_tracking: must be > 0");
  if (!(d_tracking <= d_replan)) {
    throw std::invalid_argument("tracker.d_tracking: must not exceed d_replan");
  }
}

const char* to_string(TrackerMode mode) {
  switch (mode) {
    case TrackerMode::kTracking: return "tracking";
    case TrackerMode::kWaiting: return "waiting";
    case TrackerMode::kAborted: return "aborted";
  }
  return "unknown";
}

TrackerStatus start_tracking(const PiecewiseTrajectory& traj, const TrackerConfig& config) {
  config.validate();
  TrackerStatus status;
  sample(traj, config, status);
  status.mode = TrackerMode::kTracking;
  status.index = 0;
  status.waypoint = status.waypoints.front();
  return status;
}

TrackerStatus retarget(const TrackerStatus& status, const PiecewiseTrajectory& traj,
                       const TrackerConfig& config) {
  TrackerStatus out;
  sample(traj, config, out);
  out.mode = status.mode;
  out.index = std::min(status.index, out.waypoints.size() - 1);
  out.waypoint = out.waypoints[out.index];
  return out;
}

double distance_to_polyline(const std::vector<Vec3>& polyline, const Vec3& q) {
  if (polyline.empty()) return std::numeric_limits<double>::infinity();
  double best = (q - polyline.front()).norm();
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec3 a = polyline[i - 1];
    const Vec3 ab = polyline[i] - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (q - (a + t * ab)).norm());
  }
  return best;
}

TrackerUpdate tracker_update(const TrackerStatus& status, const Vec3& mav_position,
                             const TrackerConfig& config) {
  if (status.mode == TrackerMode::kAborted) {
    throw std::logic_error("tracker_update: tracker already aborted");
  }
  TrackerUpdate out{status, std::nullopt};
  TrackerStatus& s = out.status;

  if ((mav_position - s.waypoint).norm() > config.d_tracking) {
    if (distance_to_polyline(s.path, mav_position) > config.d_replan) {
      s.mode = TrackerMode::kAborted;
      return out;
    }
    s.mode = TrackerMode::kWaiting;
    out.command = s.waypoint;
    return out;
  }

  s.mode = TrackerMode::kTracking;
  if (!s.at_last_waypoint()) ++s.index;
  s.waypoint = s.waypoints[s.index];
  out.command = s.waypoint;
  return out;
}

}  // namespace mavnav
