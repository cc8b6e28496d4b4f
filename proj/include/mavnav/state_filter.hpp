#pragma once

#include "mavnav/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <limits>

namespace mavnav {

using Mat6 = Eigen::Matrix<double, 6, 6>;

struct ImuSample {
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  // body -> map
  Vec3 accel_body = Vec3::Zero();  // specific force (m/s^2)
  double stamp = 0.0;
};

struct PoseMeasurement {
  Vec3 position = Vec3::Zero();
  double stamp = 0.0;
  Eigen::Matrix3d noise = Eigen::Matrix3d::Identity() * 0.02 * 0.02;
};

struct FilterConfig {
  double sigma_jerk = 1.0;       // white-jerk process noise (m/s^3)
  double sigma_position = 0.02;  // pose measurement noise (m)
  double initial_sigma_position = 0.05;
  double initial_sigma_velocity = 1.0;

  void validate() const;
  bool operator==(const FilterConfig&) const = default;
};

// Position/velocity estimate. The model is linear, so this is a plain Kalman
// filter even though the estimator is usually described as an EKF.
struct FilterState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat6 P = Mat6::Identity();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  double stamp = 0.0;
  double last_update_stamp = -std::numeric_limits<double>::infinity();
  int rejected_updates = 0;
};

FilterState initial_filter_state(const Vec3& p, const Vec3& v, double stamp,
                                 const FilterConfig& config);

/// Rotates the specific force into the map frame and removes gravity.
/// Throws std::invalid_argument for a quaternion that is not unit within 1e-6.
Vec3 world_accel(const ImuSample& sample, double g);

/// Process noise of the white-jerk model over dt, per axis interleaved as
/// (p, v) blocks in the layout [p_x p_y p_z v_x v_y v_z].
Mat6 white_jerk_noise(double sigma_jerk, double dt);

/// Constant-acceleration-input prediction. Throws std::invalid_argument if dt <= 0.
FilterState predict(const FilterState& state, const Vec3& accel_world, double dt,
                    const Mat6& q_process);

/// Prediction from an IMU sample; passes the sample orientation through.
FilterState predict_imu(const FilterState& state, const ImuSample& sample, double dt,
                        const FilterConfig& config, double g);

/// Linear position update. Measurements older than the last accepted one are
/// rejected (state returned with rejected_updates incremented).
FilterState update_position(const FilterState& state, const PoseMeasurement& z);

/// Symmetrizes P and lifts eigenvalues in [-1e-9, 0) to zero.
Mat6 condition_covariance(const Mat6& P);

}  // namespace mavnav
