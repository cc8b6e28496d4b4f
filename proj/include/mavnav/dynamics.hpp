#pragma once

#include <Eigen/Core>

#include <vector>

namespace mavnav {

using Vec3 = Eigen::Vector3d;

/// Planner state: position and velocity.
struct State6 {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  bool operator==(const State6& other) const { return p == other.p && v == other.v; }
};

/// Per-axis kinematic bounds. Every minimum is negative, every maximum positive.
struct Limits {
  Vec3 v_min = Vec3::Constant(-2.0);
  Vec3 v_max = Vec3::Constant(2.0);
  Vec3 a_min = Vec3::Constant(-2.0);
  Vec3 a_max = Vec3::Constant(2.0);
  Vec3 j_min = Vec3::Constant(-5.0);
  Vec3 j_max = Vec3::Constant(5.0);

  /// Throws std::invalid_argument unless min < 0 < max on every axis.
  void validate() const;
  bool operator==(const Limits&) const = default;
};

/// Constant-acceleration segment starting at s0 and lasting tau seconds.
struct MotionPrimitive {
  State6 s0;
  Vec3 u = Vec3::Zero();
  double tau = 0.0;
};

/// Evaluates the primitive polynomial at local time t in [0, tau].
/// Throws std::out_of_range outside that interval.
State6 eval_primitive(const MotionPrimitive& prim, double t);

/// Control effort plus weighted duration: |u|^2 tau + rho tau.
double primitive_cost(const MotionPrimitive& prim, double rho);

/// Time-indexed chain of primitives sharing the mission clock.
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory() = default;
  PiecewiseTrajectory(double start_time, State6 start_state);

  double start_time() const { return start_time_; }
  double duration() const;
  double end_time() const { return start_time_ + duration(); }
  bool empty() const { return segments_.empty(); }

  const std::vector<MotionPrimitive>& segments() const { return segments_; }
  const State6& start_state() const { return start_state_; }
  State6 end_state() const;

  /// Appends a segment. Throws std::invalid_argument if tau <= 0 or if the
  /// segment does not start where the trajectory currently ends (1e-9).
  void append(const MotionPrimitive& segment);

  /// State at absolute time t. Throws std::out_of_range outside the span.
  State6 state_at(double t) const;

  /// Copy of this trajectory restricted to [start_time, t]. The segment
  /// containing t is shortened, never re-parameterized, so states over the
  /// kept span are bitwise identical to the originals.
  PiecewiseTrajectory prefix_until(double t) const;

  /// Largest componentwise junction mismatch between consecutive segments.
  double max_junction_gap() const;

 private:
  // Index of the segment containing t and the absolute start time of it.
  std::pair<std::size_t, double> locate(double t) const;

  double start_time_ = 0.0;
  State6 start_state_;
  std::vector<MotionPrimitive> segments_;
};

constexpr double kJunctionTolerance = 1e-9;

}  // namespace mavnav
