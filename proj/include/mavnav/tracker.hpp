#pragma once

#include "mavnav/dynamics.hpp"

#include <optional>
#include <vector>

namespace mavnav {

struct TrackerConfig {
  double t0 = 1.0;           // lead of the first waypoint after trajectory start (s)
  double dt_sample = 0.1;    // waypoint spacing along the trajectory (s)
  double publish_rate = 10.0;
  double d_tracking = 0.5;   // hold the waypoint beyond this distance (m)
  double d_replan = 1.0;     // abandon the path beyond this distance (m)

  void validate() const;
  bool operator==(const TrackerConfig&) const = default;
};

enum class TrackerMode { kTracking, kWaiting, kAborted };

const char* to_string(TrackerMode mode);

struct TrackerStatus {
  TrackerMode mode = TrackerMode::kTracking;
  std::size_t index = 0;
  Vec3 waypoint = Vec3::Zero();
  std::vector<Vec3> waypoints;
  std::vector<double> waypoint_times;
  // Trajectory sampled every dt_sample from its start; the waypoints are its
  // tail from t0 on. Distance-to-path checks use this polyline.
  std::vector<Vec3> path;

  double waypoint_time() const { return waypoint_times[index]; }
  bool at_last_waypoint() const { return index + 1 >= waypoints.size(); }
};

/// Samples the trajectory into waypoints and returns a status positioned at
/// the first one.
TrackerStatus start_tracking(const PiecewiseTrajectory& traj, const TrackerConfig& config);

/// Re-samples a trajectory that replaced the tracked one (after a replan)
/// while keeping the waypoint index and mode.
TrackerStatus retarget(const TrackerStatus& status, const PiecewiseTrajectory& traj,
                       const TrackerConfig& config);

struct TrackerUpdate {
  TrackerStatus status;
  std::optional<Vec3> command;
};

/// One 10 Hz tick. Advances along the waypoints while the MAV keeps within
/// d_tracking, holds the waypoint while it lags on the path, and aborts once
/// it is more than d_replan away from the path.
TrackerUpdate tracker_update(const TrackerStatus& status, const Vec3& mav_position,
                             const TrackerConfig& config);

/// Distance from q to the polyline through the given vertices.
double distance_to_polyline(const std::vector<Vec3>& polyline, const Vec3& q);

}  // namespace mavnav
