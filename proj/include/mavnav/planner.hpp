#pragma once

#include "mavnav/dynamics.hpp"
#include "mavnav/heuristic.hpp"
#include "mavnav/lattice.hpp"
#include "mavnav/voxel_map.hpp"

#include <cstddef>
#include <string>

namespace mavnav {

enum class HeuristicMode { kTable, kZero };

struct PlanRequest {
  State6 start;
  double start_time = 0.0;
  Vec3 goal = Vec3::Zero();
  MapSnapshot map;
  LatticeConfig config;
  const Heuristic1DTable* table = nullptr;  // required in kTable mode
  HeuristicMode heuristic = HeuristicMode::kTable;
};

enum class PlanStatus { kSuccess, kNoPath };

struct PlanResult {
  PlanStatus status = PlanStatus::kNoPath;
  PiecewiseTrajectory trajectory;
  std::size_t expanded = 0;
  double wall_time = 0.0;  // seconds
  double cost = 0.0;
  std::string message;

  bool ok() const { return status == PlanStatus::kSuccess; }
};

/// A* over the state lattice anchored at the request's start state.
/// Throws std::invalid_argument if start or goal lies outside the map or the
/// configuration is invalid. Exhausting the open set (or the expansion budget)
/// yields kNoPath.
PlanResult plan(const PlanRequest& request);

struct ReplanResult {
  PiecewiseTrajectory trajectory;  // old trajectory when failed
  bool failed = false;
  double replan_time = 0.0;        // absolute time of the committed point
  State6 replan_state;
  PlanResult plan;
};

/// Keeps the current trajectory up to waypoint_time + t_plan and replaces the
/// rest with a fresh plan from the state there (or from the end state if that
/// time lies past the trajectory's end).
ReplanResult replan(const PiecewiseTrajectory& current, double waypoint_time, double t_plan,
                    const MapSnapshot& map, const Vec3& goal, const LatticeConfig& config,
                    const Heuristic1DTable& table);

/// True if every collision sample of the trajectory from time `from` on keeps
/// at least d_min from the obstacles.
bool trajectory_clear(const PiecewiseTrajectory& traj, double from, const ObstacleIndex& obstacles,
                      const LatticeConfig& config);

}  // namespace mavnav
