#include "mavnav/controller.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mavnav;

namespace {

double max_abs_velocity(const AxisState& start, const AxisProfile& prof) {
  double best = 0.0;
  for (double t = 0.0; t <= prof.duration(); t += 1e-3) {
    best = std::max(best, std::abs(profile_state(start, prof, t).v));
  }
  return best;
}

}  // namespace

TEST_CASE("integrate_jerk closed form") {
  const AxisState s = integrate_jerk(AxisState{1.0, 2.0, 3.0}, 6.0, 0.5);
  CHECK(s.a == doctest::Approx(6.0));
  CHECK(s.v == doctest::Approx(2.0 + 1.5 + 0.75));
  CHECK(s.p == doctest::Approx(1.0 + 1.0 + 0.375 + 0.125));
}

TEST_CASE("axis_time_optimal examples") {
  const AxisLimits lim;
  CHECK(axis_time_optimal(AxisState{2.0, 0.0, 0.0}, 2.0, lim).duration() == 0.0);

  // Short rest-to-rest move: four equal jerk phases, T = 4 (d / 2j)^(1/3).
  const double d = 0.1;
  const auto short_move = axis_time_optimal(AxisState{}, d, lim);
  CHECK(short_move.duration() == doctest::Approx(4.0 * std::cbrt(d / (2.0 * lim.j_max))).epsilon(1e-6));
  const auto sc = testing::check_profile(AxisState{}, d, short_move, lim);
  CHECK(sc.terminal_error <= 1e-6);
  CHECK(sc.limit_violation <= 1e-6);

  // Long move cruises at v_max: 1.4 s to accelerate, 7.2 m at 2 m/s, 1.4 s to stop.
  const auto long_move = axis_time_optimal(AxisState{}, 10.0, lim);
  CHECK(long_move.duration() == doctest::Approx(6.4).epsilon(1e-6));
  CHECK(max_abs_velocity(AxisState{}, long_move) == doctest::Approx(lim.v_max).epsilon(1e-6));
  const auto lc = testing::check_profile(AxisState{}, 10.0, long_move, lim);
  CHECK(lc.terminal_error <= 1e-6);
  CHECK(lc.limit_violation <= 1e-6);
  CHECK(lc.jerk_values_ok);
}

TEST_CASE("axis_time_optimal with asymmetric limits") {
  const AxisLimits lim{-1.0, 3.0, -1.5, 2.5, -4.0, 7.0};
  for (double target : {-6.0, -0.3, 0.2, 5.0}) {
    for (double v0 : {-0.8, 0.0, 1.5}) {
      const AxisState start{0.0, v0, 0.5};
      const auto prof = axis_time_optimal(start, target, lim);
      const auto c = testing::check_profile(start, target, prof, lim);
      CHECK(c.terminal_error <= 1e-6);
      CHECK(c.limit_violation <= 1e-6);
      CHECK(c.jerk_values_ok);
    }
  }
}

TEST_CASE("axis_time_optimal against the LP reference times") {
  const auto cases = testing::load_axis_oracle_cases();
  REQUIRE(cases.size() == 200);
  int slower = 0;
  for (const auto& c : cases) {
    const auto prof = axis_time_optimal(c.start, c.target, c.limits);
    const auto chk = testing::check_profile(c.start, c.target, prof, c.limits);
    CHECK(chk.terminal_error <= 1e-6);
    CHECK(chk.limit_violation <= 1e-6);
    CHECK(chk.jerk_values_ok);
    if (prof.duration() > c.t_oracle * 1.001) ++slower;
  }
  CHECK(slower == 0);
}

TEST_CASE("velocity_change reaches the target velocity") {
  const AxisLimits lim;
  for (double v1 : {-2.0, -0.5, 0.0, 1.0, 2.0}) {
    for (double a0 : {-1.0, 0.0, 1.5}) {
      AxisProfile prof;
      prof.phases = velocity_change(0.3, a0, v1, lim);
      const AxisState end = profile_state(AxisState{0.0, 0.3, a0}, prof, prof.duration());
      CHECK(end.v == doctest::Approx(v1).epsilon(1e-9));
      CHECK(std::abs(end.a) <= 1e-9);
    }
  }
}

TEST_CASE("synchronize_axes examples") {
  const Limits limits;
  const AxisLimits lim;

  // Equal durations: unchanged.
  std::array<AxisState, 3> same{};
  const Vec3 t_same(1.0, -1.0, 1.0);
  std::array<AxisProfile, 3> p_same;
  for (int i = 0; i < 3; ++i) p_same[i] = axis_time_optimal(same[i], t_same[i], lim);
  const auto s_same = synchronize_axes(p_same, same, t_same, limits);
  CHECK_FALSE(s_same.fallback);
  for (int i = 0; i < 3; ++i) {
    CHECK(s_same.profiles[i].duration() == doctest::Approx(p_same[i].duration()).epsilon(1e-6));
  }

  // y and z at their targets: dwells of the x duration.
  std::array<AxisState, 3> st{AxisState{0, 0, 0}, AxisState{2, 0, 0}, AxisState{1, 0, 0}};
  const Vec3 tg(3.0, 2.0, 1.0);
  std::array<AxisProfile, 3> pr;
  for (int i = 0; i < 3; ++i) pr[i] = axis_time_optimal(st[i], tg[i], lim);
  const auto dw = synchronize_axes(pr, st, tg, limits);
  for (int i = 1; i < 3; ++i) {
    CHECK(dw.profiles[i].duration() == doctest::Approx(pr[0].duration()).epsilon(1e-3));
    for (double t = 0; t <= dw.duration; t += 0.05) {
      const AxisState s = profile_state(st[i], dw.profiles[i], t);
      CHECK(s.p == tg[i]);
      CHECK(s.v == 0.0);
    }
  }

  // x needs longer than y: y is slowed to match and still arrives at rest.
  std::array<AxisState, 3> rest{};
  const Vec3 far(6.0, 1.0, 0.0);
  std::array<AxisProfile, 3> pf;
  for (int i = 0; i < 3; ++i) pf[i] = axis_time_optimal(rest[i], far[i], lim);
  REQUIRE(pf[0].duration() > pf[1].duration() + 1.0);
  const auto sy = synchronize_axes(pf, rest, far, limits);
  CHECK_FALSE(sy.fallback);
  CHECK(std::abs(sy.profiles[1].duration() - sy.profiles[0].duration()) <= 1e-3);
  const auto yc = testing::check_profile(rest[1], far[1], sy.profiles[1], lim);
  CHECK(yc.terminal_error <= 1e-6);
  CHECK(yc.limit_violation <= 1e-6);
}

TEST_CASE("attitude conversion") {
  const auto level = attitude_from(Vec3::Zero(), 0.0);
  CHECK(level.pitch == 0.0);
  CHECK(level.roll == 0.0);
  const auto tilt = attitude_from(Vec3(kGravity, 0, 0), 0.0);
  CHECK(tilt.pitch == doctest::Approx(M_PI / 4));
  CHECK(attitude_from(Vec3(0, -kGravity, 0), 0.3).roll == doctest::Approx(-M_PI / 4));
  CHECK(attitude_from(Vec3::Zero(), 0.3).climb_rate == 0.3);
}

TEST_CASE("mpc_step at the fixed point") {
  const Limits limits;
  const Vec3 wp(1, 2, 3);
  FullState9 s;
  s.p = wp;
  const auto first = mpc_step(s, wp, limits);
  CHECK(first.jerk == Vec3::Zero());
  CHECK(first.command.pitch == 0.0);
  CHECK(first.command.roll == 0.0);
  CHECK(first.command.climb_rate == 0.0);
  for (int k = 0; k < 10; ++k) s = mpc_step(s, wp, limits).predicted;
  CHECK((s.p - wp).norm() <= 1e-9);
  CHECK(s.v.norm() <= 1e-9);
  CHECK(s.a.norm() <= 1e-9);
}

TEST_CASE("mpc regulation converges without overshoot") {
  const Limits limits;
  const Vec3 wp(5, 0, 0);
  FullState9 s;
  double overshoot = 0.0;
  double t = 0.0;
  for (; t < 20.0; t += 0.02) {
    s = mpc_step(s, wp, limits).predicted;
    overshoot = std::max(overshoot, s.p.x() - wp.x());
  }
  CHECK((s.p - wp).norm() <= 1e-2);
  CHECK(overshoot <= 1e-2);
}

TEST_CASE("mpc clamps out-of-limit states") {
  FullState9 s;
  s.v.x() = 5.0;
  const auto out = mpc_step(s, Vec3(10, 0, 0), Limits{});
  CHECK(out.clamped);
}
