#include "mavnav/controller.hpp"

#include <algorithm>
#include <cmath>

namespace mavnav {

AxisLimits AxisLimits::from(const Limits& limits, int axis) {
  return AxisLimits{limits.v_min[axis], limits.v_max[axis], limits.a_min[axis],
                    limits.a_max[axis], limits.j_min[axis], limits.j_max[axis]};
}

AxisLimits AxisLimits::scaled(double scale) const {
  AxisLimits out = *this;
  out.v_min *= scale;
  out.v_max *= scale;
  out.a_min *= scale;
  out.a_max *= scale;
  return out;
}

double AxisProfile::duration() const {
  double t = 0.0;
  for (const auto& ph : phases) t += ph.duration;
  return t;
}

double AxisProfile::jerk_at(double t) const {
  double begin = 0.0;
  for (const auto& ph : phases) {
    if (t < begin + ph.duration) return ph.jerk;
    begin += ph.duration;
  }
  return 0.0;
}

AxisState integrate_jerk(const AxisState& s, double jerk, double t) {
  return AxisState{s.p + s.v * t + s.a * t * t / 2.0 + jerk * t * t * t / 6.0,
                   s.v + s.a * t + jerk * t * t / 2.0, s.a + jerk * t};
}

AxisState profile_state(const AxisState& start, const AxisProfile& profile, double t) {
  AxisState s = start;
  double remaining = std::max(0.0, t);
  for (const auto& ph : profile.phases) {
    const double step = std::min(remaining, ph.duration);
    s = integrate_jerk(s, ph.jerk, step);
    remaining -= step;
    if (remaining <= 0.0) return s;
  }
  // Past the end the axis coasts with whatever acceleration is left (zero for
  // a complete profile).
  return integrate_jerk(s, 0.0, remaining);
}

std::vector<JerkPhase> velocity_change(double v0, double a0, double v1, const AxisLimits& limits) {
  // Velocity reached by bringing the acceleration to zero straight away.
  const double v_stop =
      a0 >= 0.0 ? v0 + a0 * a0 / (2.0 * -limits.j_min) : v0 - a0 * a0 / (2.0 * limits.j_max);
  const bool up = v1 >= v_stop;
  // Work in a frame where the velocity has to rise; mirror back at the end.
  const double sign = up ? 1.0 : -1.0;
  const double jp = up ? limits.j_max : -limits.j_min;  // rate while raising a
  const double jn = up ? -limits.j_min : limits.j_max;  // rate while lowering a
  const double a_lim = up ? limits.a_max : -limits.a_min;
  const double w0 = sign * v0;
  const double b0 = sign * a0;
  const double w1 = sign * v1;

  const double k = 1.0 / (2.0 * jp) + 1.0 / (2.0 * jn);
  double a_peak = std::sqrt(std::max(0.0, (w1 - w0 + b0 * b0 / (2.0 * jp)) / k));
  a_peak = std::max(a_peak, b0);
  double t_hold = 0.0;
  if (a_peak > a_lim) {
    a_peak = std::max(a_lim, b0);
    const double dv_rise = (a_peak * a_peak - b0 * b0) / (2.0 * jp);
    const double dv_fall = a_peak * a_peak / (2.0 * jn);
    t_hold = a_peak > 0.0 ? std::max(0.0, (w1 - w0 - dv_rise - dv_fall) / a_peak) : 0.0;
  }
  const double t_rise = std::max(0.0, (a_peak - b0) / jp);
  const double t_fall = std::max(0.0, a_peak / jn);

  return {JerkPhase{sign * jp, t_rise}, JerkPhase{0.0, t_hold}, JerkPhase{-sign * jn, t_fall}};
}

namespace {

struct Candidate {
  std::vector<JerkPhase> accel;
  std::vector<JerkPhase> decel;
  double displacement = 0.0;
};

double displacement_of(const AxisState& start, const std::vector<JerkPhase>& a,
                       const std::vector<JerkPhase>& b) {
  AxisState s{0.0, start.v, start.a};
  for (const auto& ph : a) s = integrate_jerk(s, ph.jerk, ph.duration);
  for (const auto& ph : b) s = integrate_jerk(s, ph.jerk, ph.duration);
  return s.p;
}

// Accelerate to peak velocity v_peak (zero acceleration there), then stop.
Candidate through_peak(const AxisState& start, double v_peak, const AxisLimits& limits) {
  Candidate c;
  c.accel = velocity_change(start.v, start.a, v_peak, limits);
  c.decel = velocity_change(v_peak, 0.0, 0.0, limits);
  c.displacement = displacement_of(start, c.accel, c.decel);
  return c;
}

AxisProfile assemble(const Candidate& c, double cruise) {
  AxisProfile out;
  auto push = [&out](JerkPhase ph) {
    if (!(ph.duration > 0.0)) return;
    if (!out.phases.empty() && out.phases.back().jerk == ph.jerk) {
      out.phases.back().duration += ph.duration;
    } else {
      out.phases.push_back(ph);
    }
  };
  for (const auto& ph : c.accel) push(ph);
  push(JerkPhase{0.0, cruise});
  for (const auto& ph : c.decel) push(ph);
  return out;
}

}  // namespace

AxisProfile axis_time_optimal(const AxisState& start, double p_target, const AxisLimits& limits) {
  const double dist = p_target - start.p;
  if (dist == 0.0 && start.v == 0.0 && start.a == 0.0) return {};

  // The displacement of the cruise-free profile grows monotonically with the
  // peak velocity, so either a velocity bound is reached and held, or the
  // peak velocity is the root of displacement(v_peak) = dist.
  const Candidate hi = through_peak(start, limits.v_max, limits);
  if (dist >= hi.displacement) return assemble(hi, (dist - hi.displacement) / limits.v_max);
  const Candidate lo = through_peak(start, limits.v_min, limits);
  if (dist <= lo.displacement) return assemble(lo, (dist - lo.displacement) / limits.v_min);

  double v_lo = limits.v_min;
  double v_hi = limits.v_max;
  Candidate best = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (v_lo + v_hi);
    if (mid <= v_lo || mid >= v_hi) break;
    const Candidate c = through_peak(start, mid, limits);
    best = c;
    if (c.displacement == dist) break;
    if (c.displacement < dist) {
      v_lo = mid;
    } else {
      v_hi = mid;
    }
  }
  const double v_peak = best.decel.empty() ? 0.0 : 0.5 * (v_lo + v_hi);
  best = through_peak(start, v_peak, limits);
  // Absorb the last rounding-level residual with a cruise when it points the
  // right way.
  const double residual = dist - best.displacement;
  double cruise = 0.0;
  if (std::abs(v_peak) > 1e-9 && residual / v_peak > 0.0) cruise = residual / v_peak;
  return assemble(best, cruise);
}

SyncResult synchronize_axes(const std::array<AxisProfile, 3>& profiles,
                            const std::array<AxisState, 3>& states, const Vec3& targets,
                            const Limits& limits) {
  constexpr double kDurationTol = 1e-4;
  SyncResult out;
  out.profiles = profiles;
  for (const auto& p : profiles) out.duration = std::max(out.duration, p.duration());
  const double t_star = out.duration;

  for (int axis = 0; axis < 3; ++axis) {
    const double t_axis = profiles[axis].duration();
    if (t_star - t_axis <= kDurationTol) continue;
    const AxisState& s = states[axis];
    if (s.p == targets[axis] && s.v == 0.0 && s.a == 0.0) {
      out.profiles[axis].phases = {JerkPhase{0.0, t_star}};
      continue;
    }

    const AxisLimits base = AxisLimits::from(limits, axis);
    // Scaled bounds never exclude the current acceleration, so the slowest
    // trial can always start from the given state.
    const double scale_min = 1e-3;
    auto solve = [&](double scale) {
      AxisLimits lim = base.scaled(scale);
      lim.a_max = std::max(lim.a_max, s.a);
      lim.a_min = std::min(lim.a_min, s.a);
      return axis_time_optimal(s, targets[axis], lim);
    };
    AxisProfile slow = solve(scale_min);
    if (slow.duration() < t_star) {
      AxisProfile padded = profiles[axis];
      padded.phases.push_back(JerkPhase{0.0, t_star - t_axis});
      out.profiles[axis] = padded;
      out.fallback = true;
      continue;
    }

    double lo = scale_min;  // duration >= t_star
    double hi = 1.0;        // duration < t_star
    AxisProfile chosen = slow;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      AxisProfile trial = solve(mid);
      const double d = trial.duration();
      if (std::abs(d - t_star) < std::abs(chosen.duration() - t_star)) chosen = trial;
      if (std::abs(d - t_star) <= kDurationTol) break;
      if (d >= t_star) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.profiles[axis] = chosen;
  }
  return out;
}

AttitudeCommand attitude_from(const Vec3& accel, double climb_rate, double g) {
  return AttitudeCommand{std::atan2(accel.x(), g), std::atan2(accel.y(), g), climb_rate};
}

MpcOutput mpc_step(const FullState9& state, const Vec3& waypoint, const Limits& limits,
                   double dt, double command_lead) {
  MpcOutput out;
  std::array<AxisState, 3> states;
  std::array<AxisProfile, 3> profiles;
  for (int i = 0; i < 3; ++i) {
    const AxisLimits lim = AxisLimits::from(limits, i);
    const double v = std::clamp(state.v[i], lim.v_min, lim.v_max);
    const double a = std::clamp(state.a[i], lim.a_min, lim.a_max);
    out.clamped = out.clamped || v != state.v[i] || a != state.a[i];
    states[i] = AxisState{state.p[i], v, a};
    profiles[i] = axis_time_optimal(states[i], waypoint[i], lim);
  }
  const SyncResult sync = synchronize_axes(profiles, states, waypoint, limits);
  out.sync_fallback = sync.fallback;
  Vec3 command_accel;
  double climb = 0.0;
  for (int i = 0; i < 3; ++i) {
    out.jerk[i] = sync.profiles[i].jerk_at(0.0);
    const AxisState next = profile_state(states[i], sync.profiles[i], dt);
    out.predicted.p[i] = next.p;
    out.predicted.v[i] = next.v;
    out.predicted.a[i] = next.a;
    const AxisState lead =
        command_lead > 0.0 ? profile_state(states[i], sync.profiles[i], dt + command_lead) : next;
    command_accel[i] = lead.a;
    if (i == 2) climb = lead.v;
  }
  out.command = attitude_from(command_accel, climb);
  return out;
}

}  // namespace mavnav
