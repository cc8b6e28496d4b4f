#include "mavnav/state_filter.hpp"

#include <cmath>
#include <stdexcept>

namespace mavnav {

void FilterConfig::validate() const {
  if (!(sigma_jerk >= 0.0)) throw std::invalid_argument("filter.sigma_jerk: must be >= 0");
  if (!(sigma_position >= 0.0)) throw std::invalid_argument("filter.sigma_position: must be >= 0");
  if (!(initial_sigma_position >= 0.0)) {
    throw std::invalid_argument("filter.initial_sigma_position: must be >= 0");
  }
  if (!(initial_sigma_velocity >= 0.0)) {
    throw std::invalid_argument("filter.initial_sigma_velocity: must be >= 0");
  }
}

FilterState initial_filter_state(const Vec3& p, const Vec3& v, double stamp,
                                 const FilterConfig& config) {
  FilterState s;
  s.p = p;
  s.v = v;
  s.stamp = stamp;
  s.P.setZero();
  s.P.topLeftCorner<3, 3>().diagonal().setConstant(config.initial_sigma_position *
                                                   config.initial_sigma_position);
  s.P.bottomRightCorner<3, 3>().diagonal().setConstant(config.initial_sigma_velocity *
                                                       config.initial_sigma_velocity);
  return s;
}

Vec3 world_accel(const ImuSample& sample, double g) {
  if (std::abs(sample.orientation.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("world_accel: orientation quaternion is not unit");
  }
  return sample.orientation * sample.accel_body - Vec3(0.0, 0.0, g);
}

Mat6 white_jerk_noise(double sigma_jerk, double dt) {
  const double q = sigma_jerk * sigma_jerk;
  const double dt3 = dt * dt * dt;
  Mat6 Q = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    Q(i, i) = q * dt3 * dt * dt / 20.0;
    Q(i, i + 3) = Q(i + 3, i) = q * dt3 * dt / 8.0;
    Q(i + 3, i + 3) = q * dt3 / 3.0;
  }
  return Q;
}

Mat6 condition_covariance(const Mat6& P) {
  Mat6 S = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> eig(S);
  if (eig.eigenvalues().minCoeff() >= 0.0) return S;
  Eigen::Matrix<double, 6, 1> lambda = eig.eigenvalues();
  for (int i = 0; i < 6; ++i) {
    if (lambda[i] < 0.0 && lambda[i] >= -1e-9) lambda[i] = 0.0;
  }
  S = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (S + S.transpose());
}

FilterState predict(const FilterState& state, const Vec3& accel_world, double dt,
                    const Mat6& q_process) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be > 0");
  FilterState out = state;
  out.p = state.p + state.v * dt + accel_world * (dt * dt / 2.0);
  out.v = state.v + accel_world * dt;
  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>().diagonal().setConstant(dt);
  out.P = condition_covariance(F * state.P * F.transpose() + q_process);
  out.stamp = state.stamp + dt;
  return out;
}

FilterState predict_imu(const FilterState& state, const ImuSample& sample, double dt,
                        const FilterConfig& config, double g) {
  FilterState out =
      predict(state, world_accel(sample, g), dt, white_jerk_noise(config.sigma_jerk, dt));
  out.orientation = sample.orientation;
  return out;
}

FilterState update_position(const FilterState& state, const PoseMeasurement& z) {
  FilterState out = state;
  if (z.stamp < state.last_update_stamp) {
    ++out.rejected_updates;
    return out;
  }
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.leftCols<3>().setIdentity();
  const Eigen::Matrix3d S = H * state.P * H.transpose() + z.noise;
  const Eigen::Matrix<double, 6, 3> K = state.P * H.transpose() * S.ldlt().solve(
                                            Eigen::Matrix3d::Identity());
  const Vec3 innovation = z.position - state.p;
  const Eigen::Matrix<double, 6, 1> dx = K * innovation;
  out.p += dx.head<3>();
  out.v += dx.tail<3>();
  // Joseph form keeps P symmetric and PSD under rounding.
  const Mat6 I_KH = Mat6::Identity() - K * H;
  out.P = condition_covariance(I_KH * state.P * I_KH.transpose() + K * z.noise * K.transpose());
  out.last_update_stamp = z.stamp;
  return out;
}

}  // namespace mavnav
