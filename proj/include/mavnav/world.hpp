#pragma once

#include "mavnav/dynamics.hpp"

#include <Eigen/Geometry>

#include <optional>
#include <random>
#include <vector>

namespace mavnav {

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool operator==(const Box&) const = default;
};

/// Distance from p to the box (0 inside).
double box_distance(const Box& box, const Vec3& p);

/// Ray parameter of the first entry into the box, if the ray starts outside
/// it and enters within max_range. direction need not be normalized.
std::optional<double> ray_box_entry(const Vec3& origin, const Vec3& direction, const Box& box,
                                    double max_range);

struct ScheduleKnot {
  double time = 0.0;
  Vec3 center = Vec3::Zero();

  bool operator==(const ScheduleKnot&) const = default;
};

/// Box of fixed size whose center follows a piecewise-linear schedule, held
/// at the first/last knot outside the scheduled interval.
struct DynamicBox {
  Vec3 size = Vec3::Ones();
  std::vector<ScheduleKnot> schedule;

  Vec3 center_at(double t) const;
  Box at(double t) const;
  bool operator==(const DynamicBox&) const = default;
};

struct World {
  std::vector<Box> static_boxes;
  std::vector<DynamicBox> dynamic_boxes;

  /// Throws std::invalid_argument for degenerate boxes or bad schedules.
  void validate() const;
  std::vector<Box> boxes_at(double t) const;
  /// Distance from p to the nearest box at time t (infinity in an empty world).
  double clearance(const Vec3& p, double t) const;
  bool operator==(const World&) const = default;
};

struct SensorModel {
  int azimuth_rays = 256;          // over 360 deg
  int elevation_rays = 32;         // over the vertical field of view
  double vertical_fov_deg = 90.0;  // centered on the horizontal plane
  double max_range = 30.0;
  double range_sigma = 0.01;       // m
  double pose_sigma = 0.02;        // odometry position noise (m)
  double drift_rate = 0.0;         // odometry drift (m/s), seeded direction
  double imu_sigma = 0.05;         // accelerometer noise (m/s^2)

  void validate() const;
  /// Unit ray directions in the sensor frame, azimuth-major. Azimuths are
  /// k*360/n and elevations -fov/2 + k*fov/m, so the forward horizontal ray
  /// is always present.
  std::vector<Vec3> directions() const;
  bool operator==(const SensorModel&) const = default;
};

/// Simulated LiDAR returns in the sensor frame. Each ray reports its nearest
/// box entry within range (dynamic boxes evaluated at clock), perturbed along
/// the ray by Gaussian range noise when rng is given; misses are dropped.
std::vector<Vec3> cast_scan(const Eigen::Isometry3d& pose, const World& world,
                            const SensorModel& sensor, double clock,
                            std::mt19937_64* rng = nullptr);

}  // namespace mavnav
