#pragma once

#include "mavnav/dynamics.hpp"

#include <array>
#include <vector>

namespace mavnav {

constexpr double kGravity = 9.81;

/// Position, velocity and acceleration of the triple-integrator model.
struct FullState9 {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

struct AxisLimits {
  double v_min = -2.0, v_max = 2.0;
  double a_min = -2.0, a_max = 2.0;
  double j_min = -5.0, j_max = 5.0;

  static AxisLimits from(const Limits& limits, int axis);
  /// Velocity and acceleration bounds multiplied by scale; jerk unchanged.
  AxisLimits scaled(double scale) const;
};

struct AxisState {
  double p = 0.0;
  double v = 0.0;
  double a = 0.0;
};

struct JerkPhase {
  double jerk = 0.0;
  double duration = 0.0;
};

/// Piecewise-constant jerk schedule for one axis.
struct AxisProfile {
  std::vector<JerkPhase> phases;

  double duration() const;
  /// Jerk applied right after time t (0 once the profile has finished).
  double jerk_at(double t) const;
};

/// Exact triple-integrator motion under constant jerk for time t.
AxisState integrate_jerk(const AxisState& s, double jerk, double t);

/// State after following the profile for t seconds (held at rest afterwards).
AxisState profile_state(const AxisState& start, const AxisProfile& profile, double t);

/// Minimum-time jerk schedule taking (v0, a0) to (v1, 0). At most three
/// phases: jerk toward the peak acceleration, hold it, jerk back to zero.
std::vector<JerkPhase> velocity_change(double v0, double a0, double v1, const AxisLimits& limits);

/// Time-optimal profile from the start state to (p_target, 0, 0).
AxisProfile axis_time_optimal(const AxisState& start, double p_target, const AxisLimits& limits);

struct SyncResult {
  std::array<AxisProfile, 3> profiles;
  double duration = 0.0;
  bool fallback = false;  // some axis could not be slowed by limit scaling
};

/// Slows the faster axes so all three finish together, by bisecting on a
/// common scale of each axis' velocity and acceleration bounds.
SyncResult synchronize_axes(const std::array<AxisProfile, 3>& profiles,
                            const std::array<AxisState, 3>& states, const Vec3& targets,
                            const Limits& limits);

struct AttitudeCommand {
  double pitch = 0.0;       // rad
  double roll = 0.0;        // rad
  double climb_rate = 0.0;  // m/s
};

AttitudeCommand attitude_from(const Vec3& accel, double climb_rate, double g = kGravity);

struct MpcOutput {
  AttitudeCommand command;
  FullState9 predicted;
  Vec3 jerk = Vec3::Zero();
  bool sync_fallback = false;
  bool clamped = false;  // input state had to be clamped into the limits
};

/// One 50 Hz control step toward a waypoint held at rest. `predicted` is the
/// model state after dt. The attitude command is taken from the profile's
/// acceleration at dt + command_lead; a lead equal to the attitude response
/// time cancels a first-order attitude lag along each constant-jerk phase.
MpcOutput mpc_step(const FullState9& state, const Vec3& waypoint, const Limits& limits,
                   double dt = 0.02, double command_lead = 0.0);

}  // namespace mavnav
