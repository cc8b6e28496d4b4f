#pragma once

#include "mavnav/controller.hpp"
#include "mavnav/lattice.hpp"
#include "mavnav/state_filter.hpp"
#include "mavnav/tracker.hpp"
#include "mavnav/voxel_map.hpp"
#include "mavnav/world.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mavnav {

constexpr double kControlDt = 0.02;  // 50 Hz base tick
constexpr int kTicksPerScan = 5;     // LiDAR, pose update and waypoints at 10 Hz
constexpr int kTicksPerReplan = 50;  // 1 Hz

struct GoalSpec {
  Vec3 position = Vec3::Zero();
  double tolerance = 0.1;        // m, on the estimated position
  double speed_tolerance = 0.1;  // m/s, on the estimated speed
  double hold = 0.0;             // s to stay at the goal before moving on

  bool operator==(const GoalSpec&) const = default;
};

struct MapSpec {
  MapBounds bounds;
  VoxelMapConfig voxel;

  bool operator==(const MapSpec&) const = default;
};

struct MavSpec {
  Vec3 start = Vec3::Zero();
  Limits limits;
  double attitude_lag = 0.15;
  double disturbance_sigma = 0.02;

  bool operator==(const MavSpec&) const = default;
};

struct MissionSpec {
  double t_plan = 1.0;       // replanning lead (s)
  double max_time = 300.0;   // simulated seconds before giving up
  int failure_budget = 3;    // consecutive failed recovery plans tolerated

  bool operator==(const MissionSpec&) const = default;
};

struct Scenario {
  World world;
  MapSpec map;
  MavSpec mav;
  SensorModel sensor;
  LatticeConfig planner;
  TrackerConfig tracker;
  FilterConfig filter;
  MissionSpec mission;
  std::vector<GoalSpec> goals;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming "section.key" on the first problem.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

struct LogRow {
  double clock = 0.0;
  Vec3 true_p, true_v, est_p, est_v, waypoint;
  AttitudeCommand command;
  double tracking_err = 0.0;
  double min_clearance = 0.0;
  std::string mode;
};

struct ReplanEvent {
  double clock = 0.0;
  double replan_time = 0.0;   // start of the new part (committed point)
  bool recovery = false;      // fresh plan after an abort or for a new goal
  bool ok = false;
  double wall_time = 0.0;
  std::size_t expanded = 0;
  bool prefix_preserved = true;  // committed prefix bitwise unchanged
  std::string message;
};

/// Trajectory being tracked from `adopted` on.
struct TrajectoryEpoch {
  double adopted = 0.0;
  std::size_t goal = 0;
  PiecewiseTrajectory trajectory;
};

struct GoalEvent {
  std::size_t goal = 0;
  double reached = 0.0;     // clock when the reach test first passed
  double released = 0.0;    // clock when the hold ended
  double reach_error = 0.0; // true distance to the goal when reached
};

struct MissionReport {
  bool success = false;
  std::string failure;
  double duration = 0.0;
  double distance_flown = 0.0;
  std::size_t goals_reached = 0;
  double max_tracking_error = 0.0;
  double min_clearance = 0.0;        // true path to the world boxes
  double min_voxel_clearance = 0.0;  // true path to occupied voxel centers
  std::size_t replans = 0;
  std::size_t replan_failures = 0;
  std::size_t aborts = 0;
  std::size_t expansions = 0;
  double max_replan_wall_time = 0.0;
  std::vector<ReplanEvent> replan_events;
  std::vector<TrajectoryEpoch> epochs;
  std::vector<GoalEvent> goal_events;
  std::vector<LogRow> log;
  std::string map_csv;  // occupied voxels at the end of the mission

  std::string log_csv() const;
  std::string replans_csv() const;
  std::string summary() const;  // key=value lines
};

/// Runs the closed loop until every goal has been reached and held, the
/// failure budget is spent, or max_time passes. Deterministic for a given
/// scenario (including seed).
MissionReport run_mission(const Scenario& scenario);

}  // namespace mavnav
