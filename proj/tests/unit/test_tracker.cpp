#include "mavnav/tracker.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace mavnav;

namespace {

// Constant velocity along x from the origin, starting at t = 5.
PiecewiseTrajectory cruise(double duration, double speed = 1.0) {
  PiecewiseTrajectory traj(5.0, State6{Vec3::Zero(), Vec3(speed, 0, 0)});
  if (duration > 0) traj.append(MotionPrimitive{traj.start_state(), Vec3::Zero(), duration});
  return traj;
}

}  // namespace

TEST_CASE("start_tracking sampling") {
  TrackerConfig cfg;
  const auto empty = start_tracking(PiecewiseTrajectory(2.0, State6{Vec3(1, 2, 3), Vec3::Zero()}), cfg);
  REQUIRE(empty.waypoints.size() == 1);
  CHECK(empty.waypoints[0] == Vec3(1, 2, 3));
  CHECK(empty.waypoint == Vec3(1, 2, 3));

  const auto st = start_tracking(cruise(cfg.t0 + 0.25), cfg);
  REQUIRE(st.waypoint_times.size() == 4);
  CHECK(st.waypoint_times[0] == doctest::Approx(6.0));
  CHECK(st.waypoint_times[1] == doctest::Approx(6.1));
  CHECK(st.waypoint_times[2] == doctest::Approx(6.2));
  CHECK(st.waypoint_times[3] == doctest::Approx(6.25));
  CHECK(st.mode == TrackerMode::kTracking);
  CHECK(st.index == 0);

  const auto long_run = start_tracking(cruise(4.0), cfg);
  for (std::size_t i = 1; i + 1 < long_run.waypoints.size(); ++i) {
    CHECK((long_run.waypoints[i] - long_run.waypoints[i - 1]).norm() == doctest::Approx(0.1));
  }
  CHECK(long_run.waypoints.back() == cruise(4.0).end_state().p);
  // Path polyline covers the trajectory from its start.
  CHECK(long_run.path.front() == Vec3::Zero());
}

TEST_CASE("tracker_update modes") {
  TrackerConfig cfg;
  cfg.d_tracking = 0.5;
  cfg.d_replan = 1.0;
  const auto st = start_tracking(cruise(4.0), cfg);
  const Vec3 p0 = st.waypoints[0];

  const auto on = tracker_update(st, p0, cfg);
  CHECK(on.status.index == 1);
  CHECK(on.status.mode == TrackerMode::kTracking);
  REQUIRE(on.command);
  CHECK(*on.command == st.waypoints[1]);

  // 0.6 m behind the waypoint, on the path.
  const auto behind = tracker_update(st, p0 - Vec3(0.6, 0, 0), cfg);
  CHECK(behind.status.mode == TrackerMode::kWaiting);
  CHECK(behind.status.index == 0);
  REQUIRE(behind.command);
  CHECK(*behind.command == p0);

  // Back within range: tracking resumes.
  const auto resumed = tracker_update(behind.status, p0 - Vec3(0.4, 0, 0), cfg);
  CHECK(resumed.status.mode == TrackerMode::kTracking);
  CHECK(resumed.status.index == 1);

  const auto off = tracker_update(st, p0 + Vec3(0, 1.2, 0), cfg);
  CHECK(off.status.mode == TrackerMode::kAborted);
  CHECK_FALSE(off.command);
  CHECK_THROWS_AS(tracker_update(off.status, p0, cfg), std::logic_error);
}

TEST_CASE("tracker stays on the last waypoint") {
  TrackerConfig cfg;
  auto st = start_tracking(cruise(1.5), cfg);
  std::size_t last_index = 0;
  for (int k = 0; k < 20; ++k) {
    const auto u = tracker_update(st, st.waypoint, cfg);
    CHECK(u.status.index >= last_index);
    last_index = u.status.index;
    st = u.status;
  }
  CHECK(st.at_last_waypoint());
  CHECK(st.waypoint == cruise(1.5).end_state().p);
}

TEST_CASE("abort iff beyond d_replan from the path") {
  TrackerConfig cfg;
  const auto st = start_tracking(cruise(4.0), cfg);
  for (double off = 0.55; off < 1.5; off += 0.1) {
    const Vec3 q = st.waypoints[3] + Vec3(0, off, 0);
    const auto u = tracker_update(st, q, cfg);
    const bool beyond = testing::polyline_distance(st.path, q) > cfg.d_replan;
    CHECK((u.status.mode == TrackerMode::kAborted) == beyond);
  }
}

TEST_CASE("retarget keeps index and mode") {
  TrackerConfig cfg;
  auto st = start_tracking(cruise(4.0), cfg);
  for (int k = 0; k < 5; ++k) st = tracker_update(st, st.waypoint, cfg).status;
  const auto re = retarget(st, cruise(4.0, 0.5), cfg);
  CHECK(re.index == st.index);
  CHECK(re.mode == st.mode);
  CHECK(re.waypoint == re.waypoints[re.index]);
}

TEST_CASE("distance_to_polyline") {
  const std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)};
  CHECK(distance_to_polyline(line, Vec3(0.5, 0.3, 0)) == doctest::Approx(0.3));
  CHECK(distance_to_polyline(line, Vec3(2, 0.5, 0)) == doctest::Approx(1.0));
  CHECK(distance_to_polyline(line, Vec3(-1, 0, 0)) == doctest::Approx(1.0));
  CHECK(distance_to_polyline({Vec3(1, 1, 1)}, Vec3(1, 1, 2)) == doctest::Approx(1.0));
}

TEST_CASE("tracker config validation") {
  TrackerConfig cfg;
  cfg.d_tracking = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
