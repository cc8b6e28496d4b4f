#include "mavnav/mission.hpp"

#include "mavnav/heuristic.hpp"
#include "mavnav/mav_model.hpp"
#include "mavnav/planner.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mavnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Independent streams so that enabling one noise source does not shift the
// samples of another.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

bool same_segments(const PiecewiseTrajectory& a, const PiecewiseTrajectory& b) {
  if (a.segments().size() != b.segments().size()) return false;
  for (std::size_t i = 0; i < a.segments().size(); ++i) {
    const auto& x = a.segments()[i];
    const auto& y = b.segments()[i];
    if (!(x.s0 == y.s0) || x.u != y.u || x.tau != y.tau) return false;
  }
  return a.start_state() == b.start_state() && a.start_time() == b.start_time();
}

enum class Phase { kNeedPlan, kFollow, kAborted, kHold, kDone };

}  // namespace

void Scenario::validate() const {
  world.validate();
  require((map.bounds.min.array() < map.bounds.max.array()).all(),
          "map.min: must be below map.max on every axis");
  require(map.voxel.resolution > 0.0, "map.resolution: must be > 0");
  require(map.voxel.scan_window >= 1, "map.scan_window: must be >= 1");
  try {
    mav.limits.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("mav.limits: ") + e.what());
  }
  require(map.bounds.contains(mav.start), "mav.start: outside the map bounds");
  require(mav.attitude_lag >= 0.0, "mav.attitude_lag: must be >= 0");
  require(mav.disturbance_sigma >= 0.0, "mav.disturbance_sigma: must be >= 0");
  sensor.validate();
  planner.validate();
  tracker.validate();
  require(tracker.publish_rate == 10.0,
          "tracker.publish_rate: the simulated schedule publishes waypoints at 10 Hz");
  filter.validate();
  require(mission.t_plan >= 0.0, "mission.t_plan: must be >= 0");
  require(mission.max_time > 0.0, "mission.max_time: must be > 0");
  require(mission.failure_budget >= 1, "mission.failure_budget: must be >= 1");
  require(!goals.empty(), "goals: at least one goal is required");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const std::string where = "goals[" + std::to_string(i) + "]";
    require(map.bounds.contains(goals[i].position), where + ".position: outside the map bounds");
    require(goals[i].tolerance > 0.0, where + ".tolerance: must be > 0");
    require(goals[i].speed_tolerance > 0.0, where + ".speed_tolerance: must be > 0");
    require(goals[i].hold >= 0.0, where + ".hold: must be >= 0");
  }
}

std::string MissionReport::log_csv() const {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf),
                 "clock,true_px,true_py,true_pz,true_vx,true_vy,true_vz,est_px,est_py,est_pz,"
                 "est_vx,est_vy,est_vz,wp_x,wp_y,wp_z,theta,phi,climb,tracking_err,"
                 "min_clearance,mode\n");
  for (const auto& r : log) {
    fmt::format_to(std::back_inserter(buf),
                   "{:.2f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},"
                   "{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},"
                   "{:.6f},{}\n",
                   r.clock, r.true_p.x(), r.true_p.y(), r.true_p.z(), r.true_v.x(), r.true_v.y(),
                   r.true_v.z(), r.est_p.x(), r.est_p.y(), r.est_p.z(), r.est_v.x(), r.est_v.y(),
                   r.est_v.z(), r.waypoint.x(), r.waypoint.y(), r.waypoint.z(), r.command.pitch,
                   r.command.roll, r.command.climb_rate, r.tracking_err, r.min_clearance, r.mode);
  }
  return fmt::to_string(buf);
}

std::string MissionReport::replans_csv() const {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf),
                 "clock,replan_time,recovery,ok,wall_time,expanded,prefix_preserved,message\n");
  for (const auto& e : replan_events) {
    fmt::format_to(std::back_inserter(buf), "{:.2f},{:.6f},{},{},{:.6f},{},{},{}\n", e.clock,
                   e.replan_time, e.recovery ? 1 : 0, e.ok ? 1 : 0, e.wall_time, e.expanded,
                   e.prefix_preserved ? 1 : 0, e.message);
  }
  return fmt::to_string(buf);
}

std::string MissionReport::summary() const {
  fmt::memory_buffer buf;
  auto line = [&buf](const char* key, const auto& value) {
    fmt::format_to(std::back_inserter(buf), "{}={}\n", key, value);
  };
  line("success", success ? "true" : "false");
  if (!success) line("failure", failure);
  line("mission_duration", fmt::format("{:.2f}", duration));
  line("distance_flown", fmt::format("{:.3f}", distance_flown));
  line("goals_reached", goals_reached);
  line("max_tracking_error", fmt::format("{:.4f}", max_tracking_error));
  line("min_clearance", fmt::format("{:.4f}", min_clearance));
  line("min_voxel_clearance", fmt::format("{:.4f}", min_voxel_clearance));
  line("replans", replans);
  line("replan_failures", replan_failures);
  line("aborts", aborts);
  line("expansions", expansions);
  line("max_replan_wall_time", fmt::format("{:.4f}", max_replan_wall_time));
  for (const auto& g : goal_events) {
    line(fmt::format("goal{}_reached", g.goal).c_str(), fmt::format("{:.2f}", g.reached));
    line(fmt::format("goal{}_error", g.goal).c_str(), fmt::format("{:.4f}", g.reach_error));
  }
  return fmt::to_string(buf);
}

MissionReport run_mission(const Scenario& sc) {
  sc.validate();
  MissionReport rep;
  rep.min_clearance = kInf;
  rep.min_voxel_clearance = kInf;

  auto sensor_rng = stream(sc.seed, 1);
  auto odom_rng = stream(sc.seed, 2);
  auto imu_rng = stream(sc.seed, 3);

  VoxelGrid grid = VoxelGrid::covering(sc.map.bounds, sc.map.voxel);
  const Heuristic1DTable table = Heuristic1DTable::build(sc.planner);

  MavModel mav;
  mav.state.p = sc.mav.start;
  mav.attitude_lag = sc.mav.attitude_lag;
  mav.disturbance_sigma = sc.mav.disturbance_sigma;
  mav.rng = stream(sc.seed, 4);

  FilterState est = initial_filter_state(sc.mav.start, Vec3::Zero(), 0.0, sc.filter);
  Vec3 drift_dir = Vec3::Zero();
  if (sc.sensor.drift_rate > 0.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    drift_dir = Vec3(n(odom_rng), n(odom_rng), 0.0).normalized();
  }
  std::normal_distribution<double> pose_noise(0.0, sc.sensor.pose_sigma);
  std::normal_distribution<double> imu_noise(0.0, sc.sensor.imu_sigma);
  const Eigen::Matrix3d pose_cov =
      Eigen::Matrix3d::Identity() * sc.filter.sigma_position * sc.filter.sigma_position;

  Phase phase = Phase::kNeedPlan;
  std::size_t goal = 0;
  bool attempted = false;  // a plan was tried since entering kNeedPlan
  int failures = 0;
  double hold_start = 0.0;
  Vec3 hold_point = sc.mav.start;
  PiecewiseTrajectory traj;
  TrackerStatus tracker;
  Vec3 prev_pred_a = Vec3::Zero();
  Vec3 prev_true_v = mav.state.v;
  std::int64_t scan_index = 0;

  auto fresh_plan = [&](double t) {
    ReplanEvent ev;
    ev.clock = t;
    ev.replan_time = t;
    ev.recovery = true;
    const auto wall_begin = std::chrono::steady_clock::now();
    PlanRequest req;
    req.start = State6{est.p, est.v};
    req.start_time = t;
    req.goal = sc.goals[goal].position;
    req.map = grid.snapshot(t);
    req.config = sc.planner;
    req.table = &table;
    PlanResult r;
    try {
      r = plan(req);
    } catch (const std::invalid_argument& e) {
      r.message = e.what();
    }
    ev.ok = r.ok();
    ev.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_begin).count();
    ev.expanded = r.expanded;
    ev.message = r.message;
    ++rep.replans;
    rep.expansions += r.expanded;
    rep.max_replan_wall_time = std::max(rep.max_replan_wall_time, ev.wall_time);
    if (ev.ok) {
      traj = r.trajectory;
      tracker = start_tracking(traj, sc.tracker);
      rep.epochs.push_back(TrajectoryEpoch{t, goal, traj});
      failures = 0;
      phase = Phase::kFollow;
    } else {
      ++rep.replan_failures;
      ++failures;
    }
    rep.replan_events.push_back(std::move(ev));
  };

  auto check_reached = [&](double t) {
    if (phase != Phase::kNeedPlan && phase != Phase::kFollow && phase != Phase::kAborted) return;
    const GoalSpec& g = sc.goals[goal];
    if ((est.p - g.position).norm() <= g.tolerance && est.v.norm() <= g.speed_tolerance) {
      phase = Phase::kHold;
      hold_start = t;
      rep.goal_events.push_back(GoalEvent{goal, t, t, (mav.state.p - g.position).norm()});
    }
  };

  auto check_release = [&](double t) {
    if (phase != Phase::kHold) return;
    const GoalSpec& g = sc.goals[goal];
    if (t - hold_start < g.hold - 1e-9) return;
    rep.goal_events.back().released = t;
    ++rep.goals_reached;
    hold_point = g.position;
    if (++goal == sc.goals.size()) {
      phase = Phase::kDone;
    } else {
      phase = Phase::kNeedPlan;
      attempted = false;
    }
  };

  for (std::int64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * kControlDt;
    const Eigen::Quaterniond attitude = mav.orientation();

    if (k > 0) {
      ImuSample imu;
      imu.orientation = attitude;
      imu.stamp = t;
      const Vec3 mean_accel = (mav.state.v - prev_true_v) / kControlDt;
      imu.accel_body = attitude.conjugate() * (mean_accel + Vec3(0.0, 0.0, kGravity));
      if (sc.sensor.imu_sigma > 0.0) {
        for (int i = 0; i < 3; ++i) imu.accel_body[i] += imu_noise(imu_rng);
      }
      est = predict_imu(est, imu, kControlDt, sc.filter, kGravity);
    }

    if (k % kTicksPerScan == 0) {
      Eigen::Isometry3d true_pose = Eigen::Isometry3d::Identity();
      true_pose.translate(mav.state.p);
      true_pose.rotate(attitude);
      const auto points = cast_scan(true_pose, sc.world, sc.sensor, t, &sensor_rng);

      Vec3 odom = mav.state.p + drift_dir * (sc.sensor.drift_rate * t);
      if (sc.sensor.pose_sigma > 0.0) {
        for (int i = 0; i < 3; ++i) odom[i] += pose_noise(odom_rng);
      }
      Eigen::Isometry3d odom_pose = Eigen::Isometry3d::Identity();
      odom_pose.translate(odom);
      odom_pose.rotate(attitude);
      grid.integrate_scan(odom_pose, points, scan_index);
      grid.expire_old_scans(scan_index);
      ++scan_index;

      est = update_position(est, PoseMeasurement{odom, t, pose_cov});

      for (const Vec3& c : grid.occupied_centers()) {
        rep.min_voxel_clearance = std::min(rep.min_voxel_clearance, (c - mav.state.p).norm());
      }

      check_reached(t);
      if (phase == Phase::kFollow) {
        tracker = tracker_update(tracker, est.p, sc.tracker).status;
        if (tracker.mode == TrackerMode::kAborted) {
          ++rep.aborts;
          phase = Phase::kAborted;
          hold_point = est.p;
          fresh_plan(t);
        }
      }
      if (phase == Phase::kNeedPlan && !attempted) {
        attempted = true;
        hold_point = est.p;
        fresh_plan(t);
      }
    } else {
      check_reached(t);
    }
    check_release(t);

    if (k > 0 && k % kTicksPerReplan == 0) {
      if (phase == Phase::kFollow && !tracker.at_last_waypoint()) {
        const PiecewiseTrajectory old = traj;
        const auto wall_begin = std::chrono::steady_clock::now();
        const MapSnapshot snap = grid.snapshot(t);
        ReplanResult rr = replan(old, tracker.waypoint_time(), sc.mission.t_plan, snap,
                                 sc.goals[goal].position, sc.planner, table);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                          wall_begin).count();
        ReplanEvent ev;
        ev.clock = t;
        ev.replan_time = rr.replan_time;
        ev.ok = !rr.failed;
        ev.wall_time = wall;  // snapshot and k-d tree build included
        ev.expanded = rr.plan.expanded;
        ev.message = rr.plan.message;
        ++rep.replans;
        rep.expansions += rr.plan.expanded;
        rep.max_replan_wall_time = std::max(rep.max_replan_wall_time, wall);
        if (ev.ok) {
          ev.prefix_preserved = same_segments(old.prefix_until(rr.replan_time),
                                              rr.trajectory.prefix_until(rr.replan_time));
          traj = std::move(rr.trajectory);
          tracker = retarget(tracker, traj, sc.tracker);
          rep.epochs.push_back(TrajectoryEpoch{t, goal, traj});
          rep.replan_events.push_back(std::move(ev));
        } else {
          ++rep.replan_failures;
          // The kept trajectory was planned on an older map; stop following
          // it once newer scans put obstacles on it.
          const bool blocked =
              !trajectory_clear(old, tracker.waypoint_time(), *snap.obstacles, sc.planner);
          if (blocked) ev.message += "; kept trajectory blocked";
          rep.replan_events.push_back(std::move(ev));
          if (blocked) {
            ++rep.aborts;
            phase = Phase::kAborted;
            hold_point = est.p;
            fresh_plan(t);
          }
        }
      } else if (phase == Phase::kNeedPlan || phase == Phase::kAborted) {
        fresh_plan(t);
      }
    }

    Vec3 waypoint = hold_point;
    std::string mode;
    switch (phase) {
      case Phase::kNeedPlan:
        mode = "planning";
        break;
      case Phase::kAborted:
        mode = "aborted";
        break;
      case Phase::kFollow:
        waypoint = tracker.at_last_waypoint() && tracker.mode == TrackerMode::kTracking
                       ? sc.goals[goal].position
                       : tracker.waypoint;
        mode = to_string(tracker.mode);
        break;
      case Phase::kHold:
        waypoint = sc.goals[goal].position;
        mode = "holding";
        break;
      case Phase::kDone:
        waypoint = hold_point;
        mode = "done";
        break;
    }

    const MpcOutput mpc =
        mpc_step(FullState9{est.p, est.v, prev_pred_a}, waypoint, sc.mav.limits, kControlDt,
                 sc.mav.attitude_lag);
    prev_pred_a = mpc.predicted.a;

    LogRow row;
    row.clock = t;
    row.true_p = mav.state.p;
    row.true_v = mav.state.v;
    row.est_p = est.p;
    row.est_v = est.v;
    row.waypoint = waypoint;
    row.command = mpc.command;
    if (!rep.epochs.empty() && (phase == Phase::kFollow || phase == Phase::kHold)) {
      row.tracking_err = distance_to_polyline(tracker.path, mav.state.p);
    } else {
      row.tracking_err = (mav.state.p - hold_point).norm();
    }
    row.min_clearance = sc.world.clearance(mav.state.p, t);
    row.mode = mode;
    rep.max_tracking_error = std::max(rep.max_tracking_error, row.tracking_err);
    rep.min_clearance = std::min(rep.min_clearance, row.min_clearance);
    rep.log.push_back(std::move(row));

    if (phase == Phase::kDone) {
      rep.success = true;
      rep.duration = t;
      break;
    }
    if (failures >= sc.mission.failure_budget) {
      rep.failure = fmt::format("no plan to goal {} after {} attempts", goal, failures);
      rep.duration = t;
      break;
    }
    if (t >= sc.mission.max_time) {
      rep.failure = "mission time exceeded";
      rep.duration = t;
      break;
    }

    prev_true_v = mav.state.v;
    const Vec3 before = mav.state.p;
    mav = mav_step(mav, mpc.command, kControlDt);
    rep.distance_flown += (mav.state.p - before).norm();
  }

  rep.map_csv = grid.export_csv();
  return rep;
}

}  // namespace mavnav
